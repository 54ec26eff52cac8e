"""Command-line interface: ``pccompare compare | micomp | assumptions``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

from .errors import ConfigError, DataFormatError, DegenerateDataError, DomainError, PcCompareError
from .pca import GroupFactor, OutputMatrix
from .pipeline import (
    SCALING_METHODS,
    ComparisonResult,
    ComparisonSpec,
    LevelSpec,
    MultiComparison,
    cmp_output,
    export_json,
    load_export,
    micomp,
    read_matrix,
    single,
)
from .report import PvalFormatOptions, TableSpec, assumptions_text, grid_summary_text, latex_table, text_summary

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_DEGENERATE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # usage problems are configuration errors
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from None


def _add_selection(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ve", type=_floats, help="variance fractions for MANOVA PC counts, e.g. 0.9 or 0.5,0.9")
    p.add_argument("--npcs", type=_ints, help="explicit PC counts for MANOVA (overrides --ve)")


def _add_matrix_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("matrix", help="whitespace-separated matrix, one observation per row")
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--groups", help="file with one group label per observation")
    grp.add_argument("--split", type=_ints, help="contiguous group sizes, e.g. 10,10")
    p.add_argument("--name", default=None, help="output name (default: file stem)")
    p.add_argument("--header", action="store_true", help="skip the first non-empty line of input files")


def _add_format(p: argparse.ArgumentParser) -> None:
    p.add_argument("--na-str", default=None, help="text printed for not-applicable results")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pccompare", description="Compare groups of multivariate observations via PCA.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    cmp = sub.add_parser("compare", help="compare groups of one output matrix")
    _add_matrix_input(cmp)
    _add_selection(cmp)
    _add_format(cmp)
    cmp.add_argument("--export", help="write JSON results to this path")

    mic = sub.add_parser("micomp", help="run a grid of comparisons described by a JSON config")
    mic.add_argument("config", help="JSON run configuration")
    _add_selection(mic)
    _add_format(mic)
    mic.add_argument("--concat", action=argparse.BooleanOptionalAction, default=None,
                     help="append a concatenated output")
    mic.add_argument("--scaling", default=None, help=f"concatenation scaling: {', '.join(SCALING_METHODS)}")
    mic.add_argument("--export", help="write JSON results to this path")
    mic.add_argument("--latex", help="write a LaTeX table to this path")
    mic.add_argument("--booktabs", action=argparse.BooleanOptionalAction, default=None)
    mic.add_argument("--minval", type=float, default=None, help="cap printed p-values below this value")
    mic.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    mic.add_argument("--header", action="store_true", default=None)

    asm = sub.add_parser("assumptions", help="check normality and homogeneity assumptions")
    src = asm.add_mutually_exclusive_group(required=True)
    src.add_argument("matrix", nargs="?", help="matrix file (as for compare)")
    src.add_argument("--from-export", help="JSON export written by compare or micomp")
    grp = asm.add_mutually_exclusive_group()
    grp.add_argument("--groups")
    grp.add_argument("--split", type=_ints)
    asm.add_argument("--name", default=None)
    asm.add_argument("--header", action="store_true")
    asm.add_argument("--all-pcs", action="store_true", help="list univariate checks for every PC")
    _add_selection(asm)
    _add_format(asm)
    return parser


def _read_groups(path: str) -> GroupFactor:
    try:
        tokens = Path(path).read_text().split()
    except OSError as exc:
        raise DataFormatError(path, f"cannot read group file ({exc})") from exc
    if not tokens:
        raise DataFormatError(path, "group file is empty")
    return GroupFactor(tuple(tokens))


def _matrix_comparison(args: argparse.Namespace) -> ComparisonResult:
    data = read_matrix(args.matrix, header=args.header)
    if args.groups:
        groups = _read_groups(args.groups)
    elif args.split:
        if sum(args.split) != data.shape[0]:
            raise ConfigError(f"--split sizes sum to {sum(args.split)}, matrix has {data.shape[0]} rows")
        groups = GroupFactor.from_sizes(args.split)
    else:
        raise ConfigError("give either --groups or --split")
    name = args.name or Path(args.matrix).stem
    if len(groups) != data.shape[0]:
        raise ConfigError(f"{len(groups)} group labels for {data.shape[0]} observations")
    if not args.ve and not args.npcs:
        raise ConfigError("give --ve or --npcs")
    return cmp_output(name, OutputMatrix(data, name), groups, ve=args.ve, npcs=args.npcs)


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise DataFormatError(path, f"cannot write file ({exc})") from exc


def cmd_compare(args: argparse.Namespace) -> int:
    cmp = _matrix_comparison(args)
    print(text_summary(cmp, na_str=args.na_str or "NA"), end="")
    if args.export:
        _write(args.export, export_json(single(cmp)))
    return EXIT_OK


def _require(doc: dict, key: str, kind: type, where: str) -> Any:
    if key not in doc:
        raise ConfigError(f"{where}: missing '{key}'")
    if not isinstance(doc[key], kind):
        raise ConfigError(f"{where}: '{key}' must be a {kind.__name__}")
    return doc[key]


def load_config(path: str) -> dict:
    """Read and validate a run configuration; folders are resolved relative to the file."""
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise DataFormatError(path, f"cannot read config ({exc})") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    base = Path(path).resolve().parent
    comps = _require(doc, "comparisons", list, path)
    if not comps:
        raise ConfigError(f"{path}: at least one comparison is required")
    specs = []
    for i, c in enumerate(comps):
        where = f"{path}: comparison {i + 1}"
        if not isinstance(c, dict):
            raise ConfigError(f"{where}: must be an object")
        name = str(c.get("name", i + 1))
        levels = _require(c, "levels", list, where)
        if len(levels) < 2:
            raise ConfigError(f"{where} ('{name}'): at least two levels are required, got {len(levels)}")
        lv = []
        for l in levels:
            if not isinstance(l, dict):
                raise ConfigError(f"{where}: each level must be an object")
            folder = Path(str(_require(l, "folder", str, where)))
            lv.append(LevelSpec(str(_require(l, "label", str, where)),
                                str(folder if folder.is_absolute() else base / folder),
                                str(_require(l, "glob", str, where))))
        specs.append(ComparisonSpec(name, tuple(lv)))
    doc["_specs"] = specs
    method = doc.get("concat_method", "range")
    if method not in SCALING_METHODS:
        raise ConfigError(f"{path}: unknown scaling method '{method}'; valid methods: {', '.join(SCALING_METHODS)}")
    for key in ("ve", "npcs"):
        if key in doc and not isinstance(doc[key], (list, int, float)):
            raise ConfigError(f"{path}: '{key}' must be a number or a list")
    ve = doc.get("ve")
    for v in ve if isinstance(ve, list) else ([ve] if ve is not None else []):
        if not isinstance(v, (int, float)) or not 0 < v <= 1:
            raise ConfigError(f"{path}: variance fractions must lie in (0, 1], got {v!r}")
    return doc


def _table_spec(report: dict, args: argparse.Namespace) -> TableSpec:
    pv = dict(report.get("pvalf", {}))
    if args.minval is not None:
        pv["minval"] = args.minval
    if args.na_str is not None:
        pv["na_str"] = args.na_str
    try:
        opts = PvalFormatOptions(**pv)
    except TypeError as exc:
        raise ConfigError(f"invalid p-value format options ({exc})") from exc
    kw = {k: report[k] for k in ("data_show", "data_labels", "booktabs", "col_width", "label", "caption") if k in report}
    if args.booktabs is not None:
        kw["booktabs"] = args.booktabs
    return TableSpec(pvalf=opts, **kw)


def cmd_micomp(args: argparse.Namespace) -> int:
    doc = load_config(args.config)
    method = args.scaling or doc.get("concat_method", "range")
    if method not in SCALING_METHODS:
        raise ConfigError(f"unknown scaling method '{method}'; valid methods: {', '.join(SCALING_METHODS)}")
    concat = args.concat if args.concat is not None else bool(doc.get("concat", False))
    ve = args.ve or doc.get("ve")
    npcs = args.npcs or doc.get("npcs")
    if ve is None and npcs is None:
        raise ConfigError("the config (or command line) must give 've' or 'npcs'")
    report = doc.get("report")
    if report is not None and not isinstance(report, dict):
        raise ConfigError("'report' must be an object")
    spec = _table_spec(report or {}, args) if (report is not None or args.latex) else None
    header = bool(args.header) if args.header is not None else bool(doc.get("header", False))
    mc = micomp(doc.get("outputs"), doc["_specs"], ve=ve, npcs=npcs, concat=concat, method=method,
                header=header, threads=args.threads)
    na_str = args.na_str or "NA"
    print(grid_summary_text(mc, na_str=na_str), end="")
    export = args.export or doc.get("export")
    if export:
        _write(export, export_json(mc))
    latex_path = args.latex or (report or {}).get("file")
    if spec is not None and latex_path:
        _write(latex_path, latex_table(mc, spec))
    return EXIT_OK


def _print_assumptions(mc: MultiComparison, na_str: str, all_pcs: bool) -> None:
    multi = mc.shape != (1, 1)
    for i, out in enumerate(mc.output_names):
        for j, comp in enumerate(mc.comparison_names):
            cell = mc.grid[i][j]
            if multi:
                print(f"--- Output: {out} | Comparison: {comp} ---")
            if not isinstance(cell, ComparisonResult):
                print(f"not available: {cell.reason}")
                continue
            print(assumptions_text(cell.assumptions(), na_str=na_str, all_pcs=all_pcs))


def cmd_assumptions(args: argparse.Namespace) -> int:
    na_str = args.na_str or "NA"
    if args.from_export:
        try:
            text = Path(args.from_export).read_text()
        except OSError as exc:
            raise DataFormatError(args.from_export, f"cannot read export ({exc})") from exc
        mc = load_export(text)
    else:
        mc = single(_matrix_comparison(args))
    _print_assumptions(mc, na_str, args.all_pcs)
    return EXIT_OK


_COMMANDS = {"compare": cmd_compare, "micomp": cmd_micomp, "assumptions": cmd_assumptions}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # --help or a usage error
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"pccompare: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataFormatError as exc:
        print(f"pccompare: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DegenerateDataError as exc:
        print(f"pccompare: degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (DomainError, PcCompareError) as exc:
        print(f"pccompare: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
