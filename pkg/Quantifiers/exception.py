from typing import Sequence, Tuple


class BaseQuantifierException(Exception):
    pass


class QuantifierArgumentError(BaseQuantifierException):
    def __init__(self, operation: str, msg: str, *args):
        super(BaseQuantifierException, self).__init__(*args)
        self.operation = operation
        self.msg = msg

    def __str__(self) -> str:
        return f"{self.operation}: {self.msg}"


class ExtensionSearchError(BaseQuantifierException):
    def __init__(
        self,
        base_dims: Tuple[int, int],
        tried: Sequence[Tuple[int, int]],
        *args,
    ):
        super(BaseQuantifierException, self).__init__(*args)
        self.base_dims = tuple(base_dims)
        self.tried = [tuple(t_) for t_ in tried]

    def __str__(self) -> str:
        return (
            f"no feasible extension of a {self.base_dims} state, "
            f"ancilla dims tried: {self.tried or 'none'}"
        )
