import csv
import io
from typing import List, Sequence

from Testbench.types import PropertySuiteReport
from utils.helpers import dump_json

CSV_FIELDS = ["suite", "measure", "seed", "trials", "failures", "passed"]


def reports_to_json(
    reports: Sequence[PropertySuiteReport], include_wall_time: bool = False
) -> str:
    return dump_json(
        {
            "passed": all(r_.passed for r_ in reports),
            "suites": [r_.to_json_dict(include_wall_time) for r_ in reports],
        }
    )


def _rows(reports: Sequence[PropertySuiteReport]) -> List[dict]:
    return [
        {
            "suite": r_.suite,
            "measure": r_.measure,
            "seed": r_.seed,
            "trials": r_.trials,
            "failures": len(r_.failures),
            "passed": r_.passed,
        }
        for r_ in reports
    ]


def reports_to_csv(reports: Sequence[PropertySuiteReport]) -> str:
    buffer_ = io.StringIO()
    writer_ = csv.DictWriter(buffer_, CSV_FIELDS, lineterminator="\n")
    writer_.writeheader()
    writer_.writerows(_rows(reports))
    return buffer_.getvalue()


def reports_to_table(reports: Sequence[PropertySuiteReport]) -> str:
    """Fixed-width summary, one line per suite plus failing trial ids."""
    rows_ = _rows(reports)
    widths_ = {
        f_: max([len(f_)] + [len(str(r_[f_])) for r_ in rows_])
        for f_ in CSV_FIELDS
    }
    lines_ = [
        "  ".join(f_.ljust(widths_[f_]) for f_ in CSV_FIELDS),
        "  ".join("-" * widths_[f_] for f_ in CSV_FIELDS),
    ]
    for report_, row_ in zip(reports, rows_):
        lines_.append(
            "  ".join(str(row_[f_]).ljust(widths_[f_]) for f_ in CSV_FIELDS)
        )
        for failure_ in report_.failures:
            lines_.append(
                f"    trial {failure_.trial} (seed {failure_.seed}): "
                f"requires {failure_.required}"
            )
    return "\n".join(lines_)
