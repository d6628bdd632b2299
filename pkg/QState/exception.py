from typing import Optional

from utils.types import PathOrStr


class BaseQStateException(Exception):
    pass


class QStateArgumentError(BaseQStateException):
    def __init__(self, msg: str, *args):
        super(BaseQStateException, self).__init__(*args)
        self.msg = msg

    def __str__(self) -> str:
        return f"invalid argument: {self.msg}"


class QStateValidationError(BaseQStateException):
    def __init__(self, invariant: str, detail: str, *args):
        super(BaseQStateException, self).__init__(*args)
        self.invariant = invariant
        self.detail = detail

    def __str__(self) -> str:
        return f"{self.invariant} violated: {self.detail}"


class QStateSizeError(BaseQStateException):
    def __init__(self, dims, limit: int, *args):
        super(BaseQStateException, self).__init__(*args)
        self.dims = tuple(dims)
        self.limit = limit

    def __str__(self) -> str:
        return f"dimensions {self.dims} exceed the size limit {self.limit}"


class QStateParseError(BaseQStateException):
    def __init__(
        self,
        path: Optional[PathOrStr],
        msg: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        *args,
    ):
        super(BaseQStateException, self).__init__(*args)
        self.path = path
        self.msg = msg
        self.line = line
        self.column = column

    def __str__(self) -> str:
        where_ = f"{self.path}" if self.path else "<input>"
        if self.line is not None:
            where_ += f":{self.line}:{self.column}"
        return f"error parsing {where_}: {self.msg}"
