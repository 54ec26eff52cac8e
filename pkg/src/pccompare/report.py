"""Text, LaTeX and TikZ renderings of comparison results."""

from __future__ import annotations

import math
import re
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .assumptions import AssumptionsReport
from .errors import ConfigError
from .pca import GroupFactor
from .pipeline import ComparisonResult, MultiComparison
from .stattests import NotApplicable, PValue, TestMethod, is_na

SCI_THRESHOLD = 5e-4


@dataclass(frozen=True)
class PvalFormatOptions:
    uline: float = 0.05
    uuline: float = 0.01
    minval: float = 0.0
    na_str: str = "NA"

    def __post_init__(self) -> None:
        if self.uuline > self.uline:
            raise ConfigError("the double-underline threshold must not exceed the underline threshold")
        if self.minval < 0:
            raise ConfigError("minval must be non-negative")


def pval_format(p: PValue, opts: PvalFormatOptions = PvalFormatOptions()) -> str:
    """Format a p-value for a LaTeX table cell."""
    if is_na(p) or p is None or (isinstance(p, float) and math.isnan(p)):
        return opts.na_str
    p = float(p)
    if opts.minval > 0 and p < opts.minval:
        text = "<" + f"{opts.minval:.0e}"
    elif p < SCI_THRESHOLD:
        text = f"{p:.0e}"
    else:
        text = f"{p:.3f}"
    if p < opts.uuline:
        return f"\\uuline{{{text}}}"
    if p < opts.uline:
        return f"\\uline{{{text}}}"
    return text


DEFAULT_MARKS = (
    "mark=square*,mark options={color=red},mark size=0.8pt",
    "mark=diamond*,mark size=1pt",
    "mark=*,mark options={color=blue},mark size=0.8pt",
    "mark=triangle*,mark options={color=green!60!black},mark size=1pt",
    "mark=pentagon*,mark options={color=orange},mark size=1pt",
    "mark=otimes*,mark options={color=violet},mark size=1pt",
)


def tikz_scatter(
    points,
    groups: GroupFactor,
    marks: Sequence[str] = DEFAULT_MARKS,
    scale: float = 6,
    axis_color: str = "gray",
) -> str:
    """TikZ source for a 2-D scatter plot, one mark style per group.

    Coordinates are divided by the largest absolute value over both columns.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
        raise ConfigError(f"scatter data must be an n x 2 matrix, got shape {pts.shape}")
    if len(groups) != pts.shape[0]:
        raise ConfigError("one group label per point is required")
    if len(marks) < len(groups.levels):
        raise ConfigError(f"{len(groups.levels)} groups but only {len(marks)} mark styles")
    top = float(np.max(np.abs(pts)))
    pts = pts / (top if top > 0 else 1.0)
    parts = [
        f"\\begin{{tikzpicture}}[scale={scale:g}] \\path (-1.2,-1.2) (1.2,1.2);"
        f"\\draw[very thin,color={axis_color}] (0,1.1)--(0,-1.1); "
        f"\\draw[very thin,color={axis_color}] (1.1,0)--(-1.1,0); "
    ]
    for mask, mark in zip(groups.masks(), marks):
        coords = " ".join(f"({x:.3f},{y:.3f})" for x, y in pts[mask])
        parts.append(f"\\path plot[{mark}] coordinates {{ {coords}}};  ")
    parts.append("\\end{tikzpicture}")
    return "".join(parts)


def score_points(cmp: ComparisonResult) -> np.ndarray:
    scores = cmp.scores
    if scores.shape[1] >= 2:
        return scores[:, :2]
    return np.column_stack([scores[:, 0], np.zeros(scores.shape[0])])


_TOKEN = re.compile(r"(npcs|mnvp|parp|nparp|aparp|anparp|varexp)-(\d+)|scoreplot")


@dataclass(frozen=True)
class TableSpec:
    data_show: tuple[str, ...] = ("npcs-1", "mnvp-1", "parp-1", "nparp-1", "scoreplot")
    data_labels: tuple[str, ...] | None = None
    booktabs: bool = False
    col_width: bool = False
    label: str = ""
    caption: str = ""
    pvalf: PvalFormatOptions = field(default_factory=PvalFormatOptions)
    placement: str = "ht"

    def __post_init__(self) -> None:
        object.__setattr__(self, "data_show", tuple(self.data_show))
        for tok in self.data_show:
            if not _TOKEN.fullmatch(tok):
                raise ConfigError(
                    f"unknown table token '{tok}'; expected npcs-i, mnvp-i, parp-i, nparp-i, "
                    "aparp-i, anparp-i, varexp-i or scoreplot"
                )
            if tok != "scoreplot" and int(tok.split("-")[1]) < 1:
                raise ConfigError(f"table token '{tok}' needs an index of at least 1")
        if self.data_labels is not None:
            object.__setattr__(self, "data_labels", tuple(self.data_labels))
            if len(self.data_labels) != len(self.data_show):
                raise ConfigError(
                    f"{len(self.data_labels)} data labels for {len(self.data_show)} data tokens"
                )


def _default_label(tok: str, two_groups: bool) -> str:
    if tok == "scoreplot":
        return "PCS"
    kind, idx = tok.split("-")
    par = "$t$-test" if two_groups else "ANOVA"
    nonpar = "$U$ test" if two_groups else "KW test"
    return {
        "npcs": f"$\\#$PCs ({idx})",
        "mnvp": f"MNV ({idx})",
        "parp": f"{par} (PC{idx})",
        "nparp": f"{nonpar} (PC{idx})",
        "aparp": f"{par}* (PC{idx})",
        "anparp": f"{nonpar}* (PC{idx})",
        "varexp": f"\\% var. (PC{idx})",
    }[kind]


def _check_tokens(mc: MultiComparison, spec: TableSpec) -> None:
    for row in mc.grid:
        for cell in row:
            if not isinstance(cell, ComparisonResult):
                continue
            for tok in spec.data_show:
                if tok == "scoreplot":
                    continue
                kind, idx = tok.split("-")
                i = int(idx)
                if kind in ("npcs", "mnvp"):
                    if i > len(cell.npcs):
                        raise ConfigError(f"token '{tok}': only {len(cell.npcs)} variance level(s) compared")
                elif i > cell.projection.r:
                    raise ConfigError(
                        f"token '{tok}': output '{cell.output_name}' has only {cell.projection.r} PC(s)"
                    )


def _cell_text(cell, tok: str, opts: PvalFormatOptions) -> str:
    if not isinstance(cell, ComparisonResult):
        return opts.na_str
    if tok == "scoreplot":
        pic = tikz_scatter(score_points(cell), cell.groups)
        return f"\\raisebox{{-.5\\height}}{{\\resizebox {{1.2cm}} {{1.2cm}} {{ {pic} }}}}"
    kind, idx = tok.split("-")
    i = int(idx) - 1
    if kind == "npcs":
        return str(cell.npcs[i])
    if kind == "varexp":
        return f"{float(cell.varexp[i]):.3f}"
    values = {
        "mnvp": cell.manova_p,
        "parp": cell.par_p,
        "nparp": cell.nonpar_p,
        "aparp": cell.par_p_adj,
        "anparp": cell.nonpar_p_adj,
    }[kind]
    return pval_format(values[i], opts)


def latex_table(mc: MultiComparison, spec: TableSpec = TableSpec()) -> str:
    """LaTeX table with one row group per comparison and one column per output."""
    _check_tokens(mc, spec)
    nout = len(mc.output_names)
    sample = next((c for row in mc.grid for c in row if isinstance(c, ComparisonResult)), None)
    two = sample is None or sample.method_names[0] == TestMethod.TTEST
    labels = spec.data_labels or tuple(_default_label(t, two) for t in spec.data_show)
    top, mid, bottom = (r"\toprule", r"\midrule", r"\bottomrule") if spec.booktabs else (r"\hline",) * 3
    sub = f"\\cmidrule(l){{3-{nout + 2}}}" if spec.booktabs else f"\\cline{{3-{nout + 2}}}"
    lines = [f"\\begin{{table}}[{spec.placement}]", r"\begin{center}"]
    if spec.col_width:
        lines.append(r"\resizebox{\columnwidth}{!}{%")
    lines += [
        "\\begin{tabular}{cl" + "r" * nout + "}",
        top,
        f"\\multirow{{2}}{{*}}{{Comp.}} & \\multirow{{2}}{{*}}{{Data}} & \\multicolumn{{{nout}}}{{c}}{{Outputs}} \\\\",
        sub,
        " &  & " + " & ".join(mc.output_names) + "\\\\",
    ]
    for j, cname in enumerate(mc.comparison_names):
        lines.append(mid)
        lines.append(f"\\multirow{{{len(spec.data_show)}}}{{*}}{{{cname}}}")
        for tok, lab in zip(spec.data_show, labels):
            cells = [_cell_text(mc.grid[i][j], tok, spec.pvalf) for i in range(nout)]
            lines.append(f" & {lab} & " + " & ".join(cells) + "\\\\")
    lines += [bottom, r"\end{tabular}"]
    if spec.col_width:
        lines.append("} ")
    if spec.caption:
        lines.append(f"\\caption{{{spec.caption}}}")
    if spec.label:
        lines.append(f"\\label{{{spec.label}}}")
    lines += [r"\end{center}", r"\end{table}"]
    return "\n".join(lines) + "\n"


def _sig_parts(x: float, digits: int) -> tuple[str, int]:
    """Mantissa digits (trailing zeros stripped) and decimal exponent of x at ``digits`` significant digits."""
    mant, exp = f"{abs(x):.{digits - 1}e}".split("e")
    return mant.replace(".", "").rstrip("0") or "0", int(exp)


def _sci(x: float, ndig: int) -> str:
    mant, exp = f"{x:.{max(ndig - 1, 0)}e}".split("e")
    e = int(exp)
    return f"{mant}e{'-' if e < 0 else '+'}{abs(e):02d}"


def format_column(values: Sequence[float], digits: int = 7, na_str: str = "NA") -> list[str]:
    """Format numbers with a shared fixed/scientific layout, as R prints a numeric column."""
    finite = [float(v) for v in values if not (is_na(v) or v is None or math.isnan(float(v)))]
    if not finite:
        return [na_str for _ in values]
    need_sig = 1
    decimals = 0
    for v in finite:
        if v == 0:
            continue
        mant, exp = _sig_parts(v, digits)
        need_sig = max(need_sig, len(mant))
        decimals = max(decimals, len(mant) - 1 - exp)
    fixed = [f"{v:.{decimals}f}" for v in finite]
    sci = [_sci(v, need_sig) for v in finite]
    use = fixed if max(map(len, fixed)) <= max(map(len, sci)) else sci
    it = iter(use)
    return [na_str if (is_na(v) or v is None or math.isnan(float(v))) else next(it) for v in values]


def format_number(x: PValue, digits: int = 7, na_str: str = "NA") -> str:
    return format_column([x], digits, na_str)[0]


def _matrix_text(row_labels: Sequence[str], col_labels: Sequence[str], columns: Sequence[list[str]]) -> str:
    lw = max(len(s) for s in row_labels)
    widths = [max(len(h), *(len(c) for c in col)) for h, col in zip(col_labels, columns)]
    out = [" " * lw + "".join(" " + h.rjust(w) for h, w in zip(col_labels, widths))]
    for i, lab in enumerate(row_labels):
        out.append(lab.ljust(lw) + "".join(" " + col[i].rjust(w) for col, w in zip(columns, widths)))
    return "\n".join(out)


def text_summary(cmp: ComparisonResult, na_str: str = "NA") -> str:
    """Plain-text summary; univariate p-values are shown for the first PC only."""
    lines = [f"Output name: {cmp.output_name}"]
    cum = np.cumsum(cmp.varexp)
    for i, q in enumerate(cmp.npcs):
        ve = cmp.ve_levels[i] if cmp.ve_levels is not None else float(cum[q - 1])
        lines.append(f"Number of PCs which explain {100 * ve:.1f}% of variance: {q}")
    for q, p in zip(cmp.npcs, cmp.manova_p):
        lines.append(f"P-Value for MANOVA along {q} dimensions: {format_number(p, na_str=na_str)}")
    par, nonpar = cmp.method_names[0].value, cmp.method_names[1].value
    lines += [
        f"P-Value for {par} (1st PC): {format_number(cmp.par_p[0], na_str=na_str)}",
        f"P-Value for {nonpar} (1st PC): {format_number(cmp.nonpar_p[0], na_str=na_str)}",
        f"Adjusted p-Value for {par} (1st PC): {format_number(cmp.par_p_adj[0], na_str=na_str)}",
        f"Adjusted p-Value for {nonpar} (1st PC): {format_number(cmp.nonpar_p_adj[0], na_str=na_str)}",
    ]
    return "\n".join(lines) + "\n"


def assumptions_text(report: AssumptionsReport, na_str: str = "NA", all_pcs: bool = False) -> str:
    """Two blocks of p-values: multivariate checks per PC count, univariate checks per PC."""
    levels = [str(lvl) for lvl in report.levels]
    blocks = []
    if report.manova:
        rows = [f"Royston ({lvl})" for lvl in levels] + ["Box's M"]
        cols = [format_column([*m.royston, m.box_m], na_str=na_str) for m in report.manova]
        heads = [f"NPCs={m.npcs}" for m in report.manova]
        blocks.append("=== MANOVA assumptions ===\n" + _matrix_text(rows, heads, cols))
    uni = report.univariate if all_pcs else report.univariate[:1]
    if uni:
        rows = [f"Shapiro-Wilk ({lvl})" for lvl in levels] + ["Bartlett"]
        cols = [format_column([*u.shapiro_wilk, u.bartlett], na_str=na_str) for u in uni]
        heads = [f"PC{u.pc}" for u in uni]
        blocks.append(f"=== {report.parametric_name} assumptions ===\n" + _matrix_text(rows, heads, cols))
    return "\n\n".join(blocks) + "\n"


def grid_summary_text(mc: MultiComparison, na_str: str = "NA") -> str:
    """Per-comparison matrix of PC counts and p-values (rows) by output (columns)."""
    from .pipeline import summary_table

    blocks = []
    for j, name in enumerate(mc.comparison_names):
        labels, table = summary_table(mc, j)
        cols = []
        for k in range(table.shape[1]):
            vals = [NotApplicable() if math.isnan(v) else v for v in table[:, k]]
            cells = []
            for lab, v in zip(labels, vals):
                if lab.startswith("#PCs") and not is_na(v):
                    cells.append(str(int(v)))
                else:
                    cells.append(format_number(v, digits=4, na_str=na_str))
            cols.append(cells)
        blocks.append(f"Comparison: {name}\n" + _matrix_text(labels, list(mc.output_names), cols))
    return "\n\n".join(blocks) + "\n"
