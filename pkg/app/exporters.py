"""JSON, CSV and SVG output for curve samples and reports."""
import io
import logging
import math
from typing import Any, List, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402
from pydantic import BaseModel, TypeAdapter  # noqa: E402

from app.contour import domain_boundary, sample_boundary  # noqa: E402
from app.models import CurveId, CurvePoint, DomainName  # noqa: E402

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["curve", "C", "re_tau", "im_tau", "half", "residual"]
CURVE_COLORS = {CurveId.C1: "tab:green", CurveId.C2: "tab:blue", CurveId.C3: "tab:red"}
VIEW = ((-0.1, 1.1), (0.0, 3.0))


def to_json(payload: Any) -> str:
    """Serialize a model or a list of models"""
    if isinstance(payload, BaseModel):
        return payload.model_dump_json(indent=2)
    return TypeAdapter(Any).dump_json(payload, indent=2).decode("utf-8")


def curve_frame(points: List[CurvePoint]) -> pd.DataFrame:
    rows = [
        {
            "curve": point.curve.value,
            "C": "Infinity" if math.isinf(point.C) else point.C,
            "re_tau": point.tau.real,
            "im_tau": point.tau.imag,
            "half": point.half.value,
            "residual": point.residual,
        }
        for point in points
    ]
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def to_csv(points: List[CurvePoint]) -> str:
    buffer = io.StringIO()
    curve_frame(points).to_csv(buffer, index=False, lineterminator="\r\n", float_format="%.17g")
    return buffer.getvalue()


def to_svg(points: List[CurvePoint], title: Optional[str] = None) -> str:
    """Curves as polylines over the boundaries of F and F0"""
    fig, ax = plt.subplots(figsize=(6, 12))
    try:
        for domain, style in ((DomainName.F0, "k-"), (DomainName.F, "k:")):
            boundary = sample_boundary(domain_boundary(domain, VIEW[1][1] + 1, 0.001), per_piece=400)
            ax.plot(boundary.real, boundary.imag, style, linewidth=0.8, label=f"boundary of {domain.value.upper()}")

        frame = curve_frame(points)
        for curve, group in frame.groupby("curve", sort=True):
            color = CURVE_COLORS.get(CurveId(curve), "tab:gray")
            ax.plot(group["re_tau"], group["im_tau"], "-", color=color, linewidth=1.2, label=curve.upper())

        ax.set_xlim(*VIEW[0])
        ax.set_ylim(*VIEW[1])
        ax.set_aspect("equal")
        ax.set_xlabel("Re tau")
        ax.set_ylabel("Im tau")
        if title:
            ax.set_title(title)
        ax.legend(loc="upper right", fontsize="small")

        buffer = io.StringIO()
        fig.savefig(buffer, format="svg")
        return buffer.getvalue()
    finally:
        plt.close(fig)


def render(payload: Any, fmt: str) -> str:
    """Dispatch on the output format; CSV and SVG need curve points"""
    if fmt == "json":
        return to_json(payload)
    points = payload if isinstance(payload, list) else None
    if not points or not all(isinstance(point, CurvePoint) for point in points):
        raise ValueError(f"{fmt} output needs a list of curve points")
    if fmt == "csv":
        return to_csv(points)
    return to_svg(points)
