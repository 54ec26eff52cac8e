"""Ingestion, output concatenation and the comparison drivers."""

from __future__ import annotations

import json
import math
import os
import re
from collections.abc import Hashable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assumptions import AssumptionsReport, assumptions_for
from .errors import (
    ColumnCountMismatchError,
    ConfigError,
    DataFormatError,
    DegenerateDataError,
    DomainError,
    NonNumericTokenError,
    PcCompareError,
    RaggedRowsError,
    ScalingError,
    UnreadableFileError,
)
from .pca import GroupFactor, OutputMatrix, PcaProjection, pca, select_npcs
from .stattests import (
    NotApplicable,
    PValue,
    TestMethod,
    anova_oneway,
    is_na,
    kruskal_wallis,
    manova_pillai,
    mann_whitney_u,
    t_test_two_sample,
    weighted_bonferroni,
)

SCALING_METHODS = ("none", "center", "auto", "range", "iqrange", "vast", "pareto", "level")
CONCAT_NAME = "Ã"

_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")


def centerscale(v, method: str = "range") -> np.ndarray:
    """Center and scale a vector.

    ``auto``, ``vast`` and ``pareto`` use the sample standard deviation
    (n - 1 denominator); ``iqrange`` uses the interquartile range with linear
    interpolation between order statistics.
    """
    if method not in SCALING_METHODS:
        raise ConfigError(f"unknown scaling method '{method}'; valid methods: {', '.join(SCALING_METHODS)}")
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        raise DomainError("cannot center/scale an empty vector")
    if method == "none":
        return v.copy()
    mu = float(v.mean())
    centered = v - mu
    if method == "center":
        return centered
    sd = float(v.std(ddof=1)) if v.size > 1 else 0.0
    if method == "auto":
        denom = sd
    elif method == "range":
        denom = float(v.max() - v.min())
    elif method == "iqrange":
        q1, q3 = np.quantile(v, [0.25, 0.75])
        denom = float(q3 - q1)
    elif method == "vast":
        if sd == 0:
            raise ScalingError(method, "zero standard deviation")
        denom = sd * sd / mu if mu != 0 else 0.0
    elif method == "pareto":
        denom = math.sqrt(sd)
    else:
        denom = mu
    if denom == 0:
        raise ScalingError(method, "zero denominator")
    return centered / denom


def concat_outputs(outputs: Sequence[OutputMatrix], method: str = "range", name: str = CONCAT_NAME) -> OutputMatrix:
    """Join outputs observation-wise after centering/scaling each row vector of each output."""
    if not outputs:
        raise DomainError("no outputs to concatenate")
    n = outputs[0].n
    if any(o.n != n for o in outputs):
        raise DomainError("all outputs must have the same number of observations")
    blocks = []
    for k, out in enumerate(outputs):
        block = np.empty_like(out.data)
        for i in range(n):
            try:
                block[i] = centerscale(out.data[i], method)
            except ScalingError as exc:
                label = out.name or f"#{k + 1}"
                raise ScalingError(method, f"observation {i + 1} of output '{label}'") from exc
        blocks.append(block)
    return OutputMatrix(np.hstack(blocks), name)


def read_matrix(path: str | os.PathLike, header: bool = False) -> np.ndarray:
    """Parse a whitespace-separated numeric matrix; one row per line."""
    try:
        text = Path(path).read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise UnreadableFileError(path, f"cannot read file ({exc})") from exc
    rows: list[list[float]] = []
    width = None
    width_line = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        if header and width_line == 0 and not rows:
            header = False
            width_line = -1
            continue
        for tok in tokens:
            if not _NUMBER.fullmatch(tok):
                raise NonNumericTokenError(path, f"non-numeric token '{tok}'", lineno)
        if width is None:
            width, width_line = len(tokens), lineno
        elif len(tokens) != width:
            raise RaggedRowsError(
                path, f"row has {len(tokens)} columns, expected {width} as on line {width_line}", lineno
            )
        rows.append([float(t) for t in tokens])
    if not rows:
        raise UnreadableFileError(path, "file contains no data rows")
    return np.array(rows, dtype=float)


@dataclass(frozen=True)
class LevelSpec:
    label: str
    folder: str
    glob: str


@dataclass(frozen=True)
class GroupedOutputs:
    outputs: tuple[OutputMatrix, ...]
    groups: GroupFactor
    files: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.outputs:
            raise DomainError("grouped outputs need at least one output")
        n = len(self.groups)
        for out in self.outputs:
            if out.n != n:
                raise DomainError(f"output '{out.name}' has {out.n} observations, groups have {n}")

    @property
    def output_names(self) -> tuple[str, ...]:
        return tuple(o.name for o in self.outputs)

    @property
    def sample_sizes(self) -> dict[Hashable, int]:
        return dict(zip(self.groups.levels, self.groups.sizes))


def _resolve_names(output_names: Sequence[str] | None, k: int, concat: bool) -> tuple[list[str], str]:
    if output_names is None:
        return [f"out{j + 1}" for j in range(k)], CONCAT_NAME
    names = list(output_names)
    if len(names) == k:
        return names, CONCAT_NAME
    if concat and len(names) == k + 1:
        return names[:k], names[k]
    raise ConfigError(f"{len(names)} output names given for {k} file columns")


def load_group_outputs(
    levels: Sequence[LevelSpec],
    output_names: Sequence[str] | None = None,
    concat: bool = False,
    method: str = "range",
    header: bool = False,
) -> GroupedOutputs:
    """Read one observation per file, grouping files by level.

    Column j of each file becomes observation row of output j. Files within a
    level are taken in lexicographic order.
    """
    if len(levels) < 2:
        raise ConfigError("at least two levels are required")
    if concat and method not in SCALING_METHODS:
        raise ConfigError(f"unknown scaling method '{method}'; valid methods: {', '.join(SCALING_METHODS)}")
    files: list[Path] = []
    labels: list[str] = []
    for lvl in levels:
        folder = Path(lvl.folder)
        if not folder.is_dir():
            raise UnreadableFileError(folder, "folder does not exist")
        matched = sorted((p for p in folder.glob(lvl.glob) if p.is_file()), key=lambda p: p.name)
        if len(matched) < 2:
            raise DataFormatError(folder, f"pattern '{lvl.glob}' matched {len(matched)} file(s), need at least 2")
        files.extend(matched)
        labels.extend([lvl.label] * len(matched))
    mats = []
    shape = None
    first = None
    for path in files:
        mat = read_matrix(path, header=header)
        if shape is None:
            shape, first = mat.shape, path
        elif mat.shape[1] != shape[1]:
            raise ColumnCountMismatchError(path, f"{mat.shape[1]} columns, but {first} has {shape[1]}")
        elif mat.shape[0] != shape[0]:
            raise RaggedRowsError(path, f"{mat.shape[0]} rows, but {first} has {shape[0]}")
        mats.append(mat)
    k = shape[1]
    names, concat_name = _resolve_names(output_names, k, concat)
    outputs = [OutputMatrix(np.stack([m[:, j] for m in mats]), names[j]) for j in range(k)]
    if concat:
        outputs.append(concat_outputs(outputs, method, concat_name))
    groups = GroupFactor(tuple(labels), tuple(lvl.label for lvl in levels))
    return GroupedOutputs(tuple(outputs), groups, tuple(str(f) for f in files))


def grouped_from_arrays(
    data: dict[str, np.ndarray] | Sequence[OutputMatrix],
    groups: GroupFactor,
    concat: bool = False,
    method: str = "range",
    concat_name: str = CONCAT_NAME,
) -> GroupedOutputs:
    if isinstance(data, dict):
        outputs = [OutputMatrix(v, k) for k, v in data.items()]
    else:
        outputs = list(data)
    if concat:
        outputs.append(concat_outputs(outputs, method, concat_name))
    return GroupedOutputs(tuple(outputs), groups)


@dataclass(frozen=True)
class ComparisonResult:
    output_name: str
    ve_levels: tuple[float, ...] | None
    npcs: tuple[int, ...]
    manova_p: tuple[PValue, ...]
    par_p: tuple[PValue, ...]
    nonpar_p: tuple[PValue, ...]
    par_p_adj: tuple[PValue, ...]
    nonpar_p_adj: tuple[PValue, ...]
    projection: PcaProjection = field(repr=False)
    groups: GroupFactor = field(repr=False)
    method_names: tuple[TestMethod, TestMethod] = (TestMethod.TTEST, TestMethod.MANN_WHITNEY)

    @property
    def varexp(self) -> np.ndarray:
        return self.projection.varexp

    @property
    def scores(self) -> np.ndarray:
        return self.projection.scores

    def assumptions(self) -> AssumptionsReport:
        return assumptions_for(self)


def _as_tuple(v) -> tuple:
    if v is None:
        return ()
    if isinstance(v, (int, float, np.integer, np.floating)):
        return (v,)
    return tuple(v)


def _guard(fn, *args) -> PValue:
    try:
        return fn(*args).p
    except (DegenerateDataError, DomainError) as exc:
        return NotApplicable(str(exc))


def cmp_output(name: str, x, groups: GroupFactor, ve=None, npcs=None) -> ComparisonResult:
    """Compare the groups of one output.

    Either ``ve`` (variance fractions) or ``npcs`` (explicit PC counts) selects
    the MANOVA dimensions; ``npcs`` wins when both are given.
    """
    data = x if isinstance(x, OutputMatrix) else OutputMatrix(x, name)
    groups.validate(data.n)
    proj = pca(data)
    ve_levels = _as_tuple(ve)
    counts = _as_tuple(npcs)
    if counts:
        for q in counts:
            if int(q) != q or not 1 <= q <= proj.r:
                raise DomainError(f"requested {q} PCs, output '{name}' has {proj.r}")
        chosen = tuple(int(q) for q in counts)
        ve_out = None
    elif ve_levels:
        chosen = tuple(select_npcs(proj, float(v)) for v in ve_levels)
        ve_out = tuple(float(v) for v in ve_levels)
    else:
        raise ConfigError("either variance fractions or PC counts must be given")
    scores = proj.scores
    manova = tuple(manova_pillai(scores[:, :q], groups).p for q in chosen)
    masks = groups.masks()
    two = len(groups.levels) == 2
    par, nonpar = [], []
    for j in range(proj.r):
        col = scores[:, j]
        parts = [col[mask] for mask in masks]
        if two:
            par.append(_guard(t_test_two_sample, *parts))
            nonpar.append(_guard(mann_whitney_u, *parts))
        else:
            par.append(_guard(anova_oneway, parts))
            nonpar.append(_guard(kruskal_wallis, parts))
    weights = proj.varexp.tolist()
    methods = (TestMethod.TTEST, TestMethod.MANN_WHITNEY) if two else (TestMethod.ANOVA, TestMethod.KRUSKAL_WALLIS)
    return ComparisonResult(
        output_name=name,
        ve_levels=ve_out,
        npcs=chosen,
        manova_p=manova,
        par_p=tuple(par),
        nonpar_p=tuple(nonpar),
        par_p_adj=weighted_bonferroni(par, weights).adjusted,
        nonpar_p_adj=weighted_bonferroni(nonpar, weights).adjusted,
        projection=proj,
        groups=groups,
        method_names=methods,
    )


@dataclass(frozen=True)
class ComparisonSpec:
    """A named comparison: either file levels to ingest or ready grouped outputs."""

    name: str
    levels: tuple[LevelSpec, ...] = ()
    grouped: GroupedOutputs | None = None


Cell = ComparisonResult | NotApplicable


@dataclass(frozen=True)
class MultiComparison:
    grid: tuple[tuple[Cell, ...], ...]
    output_names: tuple[str, ...]
    comparison_names: tuple[str, ...]
    ve_levels: tuple[float, ...] | None = None

    def cell(self, output: int | str, comparison: int | str) -> Cell:
        i = output if isinstance(output, int) else self.output_names.index(output)
        j = comparison if isinstance(comparison, int) else self.comparison_names.index(comparison)
        return self.grid[i][j]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.output_names), len(self.comparison_names)


def _cell_task(args) -> Cell:
    out, groups, ve, npcs = args
    try:
        return cmp_output(out.name, out, groups, ve=ve, npcs=npcs)
    except (PcCompareError, ValueError) as exc:
        return NotApplicable(f"{out.name}: {exc}")


def micomp(
    output_names: Sequence[str] | None,
    comparisons: Sequence[ComparisonSpec | tuple[str, GroupedOutputs]],
    ve=None,
    npcs=None,
    concat: bool = False,
    method: str = "range",
    header: bool = False,
    threads: int | None = None,
) -> MultiComparison:
    """Compare several outputs over several comparisons.

    Rows of the result are outputs (with the concatenated output last when
    ``concat``), columns are comparisons in the given order.
    """
    if not comparisons:
        raise ConfigError("at least one comparison is required")
    specs = [c if isinstance(c, ComparisonSpec) else ComparisonSpec(c[0], grouped=c[1]) for c in comparisons]
    grouped: list[GroupedOutputs] = []
    for spec in specs:
        if spec.grouped is not None:
            grouped.append(spec.grouped)
        else:
            grouped.append(load_group_outputs(spec.levels, output_names, concat, method, header))
    names = grouped[0].output_names
    for spec, g in zip(specs, grouped):
        if len(g.outputs) != len(names):
            raise ConfigError(f"comparison '{spec.name}' has {len(g.outputs)} outputs, expected {len(names)}")
    tasks = [(g.outputs[i], g.groups, ve, npcs) for i in range(len(names)) for g in grouped]
    workers = threads if threads and threads > 0 else (os.cpu_count() or 1)
    if workers == 1:
        cells = [_cell_task(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_cell_task, tasks))
    ncmp = len(grouped)
    grid = tuple(tuple(cells[i * ncmp : (i + 1) * ncmp]) for i in range(len(names)))
    ve_levels = None if _as_tuple(npcs) else tuple(float(v) for v in _as_tuple(ve)) or None
    return MultiComparison(grid, tuple(names), tuple(s.name for s in specs), ve_levels)


def summary_table(mc: MultiComparison, comparison: int | str) -> tuple[list[str], np.ndarray]:
    """Row labels and a measures x outputs matrix for one comparison.

    Rows: PC count and MANOVA p per variance level, then PC1 parametric and
    non-parametric p-values, raw and adjusted. NotApplicable becomes NaN.
    """
    j = comparison if isinstance(comparison, int) else mc.comparison_names.index(comparison)
    cells = [row[j] for row in mc.grid]
    sample = next((c for c in cells if isinstance(c, ComparisonResult)), None)
    nlev = len(sample.npcs) if sample is not None else 1
    labels: list[str] = []
    for i in range(nlev):
        tag = _level_tag(mc, sample, i)
        labels += [f"#PCs ({tag})", f"MNV ({tag})"]
    par_name, nonpar_name = _test_names(sample)
    labels += [f"{par_name} (PC1)", f"{nonpar_name} (PC1)", f"{par_name} adj. (PC1)", f"{nonpar_name} adj. (PC1)"]
    table = np.full((len(labels), len(cells)), np.nan)
    for k, c in enumerate(cells):
        if not isinstance(c, ComparisonResult):
            continue
        col = []
        for q, p in zip(c.npcs, c.manova_p):
            col += [q, p]
        col += [c.par_p[0], c.nonpar_p[0], c.par_p_adj[0], c.nonpar_p_adj[0]]
        table[:, k] = [math.nan if is_na(v) else float(v) for v in col]
    return labels, table


def _level_tag(mc: MultiComparison, cell: ComparisonResult | None, i: int) -> str:
    if cell is not None and cell.ve_levels is not None:
        return f"ve={100 * cell.ve_levels[i]:g}%"
    if cell is not None:
        return f"npcs={cell.npcs[i]}"
    return "-"


def _test_names(cell: ComparisonResult | None) -> tuple[str, str]:
    if cell is None or cell.method_names[0] == TestMethod.TTEST:
        return "t-test", "U test"
    return "ANOVA", "KW test"


def _p_json(p: PValue) -> float | None:
    if is_na(p) or not math.isfinite(float(p)):
        return None
    return float(p)


def _cell_json(c: Cell, output: str, comparison: str) -> dict:
    if not isinstance(c, ComparisonResult):
        return {"output": output, "comparison": comparison, "error": c.reason}
    return {
        "output": output,
        "comparison": comparison,
        "ve": list(c.ve_levels) if c.ve_levels is not None else None,
        "npcs": list(c.npcs),
        "manova_p": [_p_json(p) for p in c.manova_p],
        "par_test": c.method_names[0].value,
        "nonpar_test": c.method_names[1].value,
        "par_p": [_p_json(p) for p in c.par_p],
        "nonpar_p": [_p_json(p) for p in c.nonpar_p],
        "par_p_adj": [_p_json(p) for p in c.par_p_adj],
        "nonpar_p_adj": [_p_json(p) for p in c.nonpar_p_adj],
        "eigenvalues": [float(v) for v in c.projection.eigenvalues],
        "varexp": [float(v) for v in c.varexp],
        "scores": [[float(v) for v in row] for row in c.scores],
        "groups": [str(g) for g in c.groups.labels],
        "levels": [str(g) for g in c.groups.levels],
    }


def export_dict(mc: MultiComparison) -> dict:
    return {
        "outputs": list(mc.output_names),
        "comparisons": list(mc.comparison_names),
        "ve": list(mc.ve_levels) if mc.ve_levels is not None else None,
        "results": [
            [_cell_json(c, mc.output_names[i], mc.comparison_names[j]) for j, c in enumerate(row)]
            for i, row in enumerate(mc.grid)
        ],
    }


def export_json(mc: MultiComparison) -> str:
    """Serialize a grid to JSON text; identical input gives byte-identical text."""
    return json.dumps(export_dict(mc), indent=1, ensure_ascii=False, allow_nan=False) + "\n"


def single(cmp: ComparisonResult, comparison_name: str = "") -> MultiComparison:
    return MultiComparison(((cmp,),), (cmp.output_name,), (comparison_name,), cmp.ve_levels)


def _p_from_json(v) -> PValue:
    return NotApplicable("missing in export") if v is None else float(v)


def load_export(text: str) -> MultiComparison:
    """Rebuild a grid from exported JSON (loadings are not stored, so they come back empty)."""
    try:
        doc = json.loads(text)
        outputs, comparisons = doc["outputs"], doc["comparisons"]
        rows = []
        for row in doc["results"]:
            cells = []
            for c in row:
                if "error" in c:
                    cells.append(NotApplicable(c["error"]))
                    continue
                scores = np.array(c["scores"], dtype=float)
                eig = np.array(c["eigenvalues"], dtype=float)
                proj = PcaProjection(scores, eig, np.empty((0, eig.size)))
                groups = GroupFactor(tuple(c["groups"]), tuple(c["levels"]))
                methods = (TestMethod(c["par_test"]), TestMethod(c["nonpar_test"]))
                cells.append(
                    ComparisonResult(
                        c["output"],
                        tuple(c["ve"]) if c["ve"] is not None else None,
                        tuple(c["npcs"]),
                        tuple(_p_from_json(v) for v in c["manova_p"]),
                        tuple(_p_from_json(v) for v in c["par_p"]),
                        tuple(_p_from_json(v) for v in c["nonpar_p"]),
                        tuple(_p_from_json(v) for v in c["par_p_adj"]),
                        tuple(_p_from_json(v) for v in c["nonpar_p_adj"]),
                        proj,
                        groups,
                        methods,
                    )
                )
            rows.append(tuple(cells))
        ve = tuple(doc["ve"]) if doc.get("ve") is not None else None
        return MultiComparison(tuple(rows), tuple(outputs), tuple(comparisons), ve)
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError("<export>", f"not a valid results export ({exc})") from exc
