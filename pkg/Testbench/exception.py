from typing import Iterable


class BaseTestbenchException(Exception):
    pass


class UnknownSuiteError(BaseTestbenchException):
    def __init__(self, suite_id: str, known: Iterable[str], *args):
        super(BaseTestbenchException, self).__init__(*args)
        self.suite_id = suite_id
        self.known = sorted(known)

    def __str__(self) -> str:
        return (
            f"unknown suite {self.suite_id!r}, expected one of {self.known}"
        )


class FamilyArgumentError(BaseTestbenchException):
    def __init__(self, family: str, msg: str, *args):
        super(BaseTestbenchException, self).__init__(*args)
        self.family = family
        self.msg = msg

    def __str__(self) -> str:
        return f"{self.family}: {self.msg}"


class UnknownToleranceError(BaseTestbenchException):
    def __init__(self, suite_id: str, name: str, known: Iterable[str], *args):
        super(BaseTestbenchException, self).__init__(*args)
        self.suite_id = suite_id
        self.name = name
        self.known = sorted(known)

    def __str__(self) -> str:
        return (
            f"suite {self.suite_id} has no tolerance {self.name!r}, "
            f"expected one of {self.known}"
        )
