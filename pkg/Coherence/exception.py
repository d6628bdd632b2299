from typing import Iterable


class BaseCoherenceException(Exception):
    pass


class UnknownMeasureError(BaseCoherenceException):
    def __init__(self, measure_id: str, known: Iterable[str], *args):
        super(BaseCoherenceException, self).__init__(*args)
        self.measure_id = measure_id
        self.known = sorted(known)

    def __str__(self) -> str:
        return (
            f"unknown coherence measure {self.measure_id!r}, "
            f"expected one of {self.known}"
        )


class MeasureArgumentError(BaseCoherenceException):
    def __init__(self, measure_id: str, msg: str, *args):
        super(BaseCoherenceException, self).__init__(*args)
        self.measure_id = measure_id
        self.msg = msg

    def __str__(self) -> str:
        return f"cannot evaluate {self.measure_id}: {self.msg}"
