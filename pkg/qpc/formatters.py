"""
Report assembly and rendering: human-readable summaries and CSV output.
Numbers are written with 17 significant digits, '.' decimal separator and LF line endings.
"""

import csv
import io
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, TextIO, Union

from .concurrence import QpaResult
from .dynamics import SimConfig, TrajectoryPoint

HORODECKI_COLUMNS = ["a", "c_qp", "entropy", "min_eig_pt"]
TRAJECTORY_COLUMNS = ["t", "c_qp", "entropy", "purity", "mu1"]
QPA_COLUMNS = [
    "c_qp", "lambdas", "mu1", "entropy", "purity", "rank",
    "separable_dominant", "dominant_degenerate", "truncated_weight",
]


def format_number(value: float) -> str:
    """Locale-independent 17-significant-digit representation."""
    return f"{float(value):.17g}"


def format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_number(value)
    if isinstance(value, (list, tuple)):
        return ";".join(format_cell(v) for v in value)
    return str(value)


def build_qpa_report(result: QpaResult, entropy: float, d1: int, d2: int, source: str = "") -> Dict:
    """Collects the fields reported by ``qpc qpa``."""
    return {
        "source": source,
        "d1": d1,
        "d2": d2,
        "c_qp": result.value,
        "lambdas": [float(x) for x in result.lambdas],
        "mu1": result.dominant_weight,
        "entropy": entropy,
        "purity": result.purity,
        "rank": result.rank,
        "separable_dominant": result.separable_dominant,
        "dominant_degenerate": result.dominant_degenerate,
        "truncated_weight": result.truncated_weight,
    }


def render_qpa_report(report: Dict) -> str:
    flags = [name for name in ("separable_dominant", "dominant_degenerate") if report[name]]
    lambdas = ", ".join(f"{x:.10g}" for x in report["lambdas"]) or "(none)"

    text = f"State: {report['source'] or '(inline)'} ({report['d1']} x {report['d2']})\n"
    text += f"  c_qp:             {report['c_qp']:.12g}\n"
    text += f"  singular values:  {lambdas}\n"
    text += f"  mu1:              {report['mu1']:.12g}\n"
    text += f"  entropy (nats):   {report['entropy']:.12g}\n"
    text += f"  purity:           {report['purity']:.12g}\n"
    text += f"  rank:             {report['rank']}\n"
    if report["truncated_weight"] > 0:
        text += f"  truncated weight: {report['truncated_weight']:.3e}\n"
    text += f"  flags:            {', '.join(flags) if flags else 'none'}\n"
    return text


def render_oracle_report(report: Dict) -> str:
    text = f"State: {report['source']} ({report['d1']} x {report['d2']})\n"
    text += f"  qpa:              {report['qpa']:.12g}   ({report['qpa_seconds']:.4f} s)\n"
    if report.get("wootters") is not None:
        text += f"  wootters (exact): {report['wootters']:.12g}\n"
    text += (
        f"  convex roof search: {report['oracle']:.12g}   "
        f"({report['restarts']} restarts x {report['iterations']} iterations, seed {report['seed']}, "
        f"{report['oracle_seconds']:.2f} s)\n"
    )
    chain = "qpa <= wootters <= search" if report.get("wootters") is not None else "qpa <= search"
    text += f"  ordering {chain}: {'verified' if report['ordering_ok'] else 'VIOLATED'}\n"
    return text


def write_csv(
    target: Union[str, Path, TextIO],
    columns: Sequence[str],
    rows: Iterable[Sequence],
    comments: Optional[List[str]] = None,
) -> None:
    """Writes ``# comment`` lines, the header and the rows."""
    def emit(stream: TextIO) -> None:
        for comment in comments or []:
            stream.write(f"# {comment}\n")
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_cell(value) for value in row])

    if isinstance(target, (str, Path)):
        path = Path(target)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            emit(f)
    else:
        emit(target)


def qpa_csv(report: Dict) -> str:
    buffer = io.StringIO()
    write_csv(buffer, QPA_COLUMNS, [[report[column] for column in QPA_COLUMNS]])
    return buffer.getvalue()


def trajectory_rows(points: Sequence[TrajectoryPoint]) -> List[list]:
    return [[p.t, p.c_qp, p.entropy, p.purity, p.dominant_weight] for p in points]


def trajectory_comments(config: SimConfig) -> List[str]:
    settings = " ".join(f"{key}={format_cell(value)}" for key, value in config.to_dict().items())
    return [f"seed={config.seed}", settings]
