"""Compare samples of high-dimensional observations through their principal components."""

from importlib import resources

import numpy as np

from .assumptions import AssumptionsReport, assumptions_for, bartlett, box_m, royston, shapiro_wilk
from .errors import (
    ConfigError,
    DataFormatError,
    DegenerateDataError,
    DomainError,
    PcCompareError,
    ScalingError,
)
from .pca import GroupFactor, OutputMatrix, PcaProjection, explained_variance, pca, select_npcs
from .pipeline import (
    ComparisonResult,
    ComparisonSpec,
    GroupedOutputs,
    LevelSpec,
    MultiComparison,
    centerscale,
    cmp_output,
    concat_outputs,
    export_json,
    load_group_outputs,
    micomp,
)
from .report import PvalFormatOptions, TableSpec, latex_table, pval_format, text_summary, tikz_scatter
from .stattests import NA, NotApplicable, is_na

__version__ = "0.1.0"


def sunspot_month() -> np.ndarray:
    """Monthly mean sunspot numbers, January 1749 onwards (3177 months)."""
    with resources.files(__package__).joinpath("data/sunspot_month.txt").open() as fh:
        return np.loadtxt(fh)


def sunspots_matrix() -> np.ndarray:
    """20 x 132 matrix: ten 132-month blocks from 1749 (rows 1-10) and ten from 1902 (rows 11-20).

    Built as ``concat(series[0:1320], series[1836:3156]).reshape(20, 132, order="F")``.
    """
    with resources.files(__package__).joinpath("data/sunspots.tsv").open() as fh:
        return np.loadtxt(fh)


__all__ = [
    "NA",
    "AssumptionsReport",
    "ComparisonResult",
    "ComparisonSpec",
    "ConfigError",
    "DataFormatError",
    "DegenerateDataError",
    "DomainError",
    "GroupFactor",
    "GroupedOutputs",
    "LevelSpec",
    "MultiComparison",
    "NotApplicable",
    "OutputMatrix",
    "PcCompareError",
    "PcaProjection",
    "PvalFormatOptions",
    "ScalingError",
    "TableSpec",
    "assumptions_for",
    "bartlett",
    "box_m",
    "centerscale",
    "cmp_output",
    "concat_outputs",
    "explained_variance",
    "export_json",
    "is_na",
    "latex_table",
    "load_group_outputs",
    "micomp",
    "pca",
    "pval_format",
    "royston",
    "select_npcs",
    "shapiro_wilk",
    "sunspot_month",
    "sunspots_matrix",
    "text_summary",
    "tikz_scatter",
]
