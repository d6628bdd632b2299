import functools
import logging
import uuid

from Core.config import Settings


def _add_logging_level(level_name, level_num, method_name=None):
    if not method_name:
        method_name = level_name.lower()

    if hasattr(logging, level_name):
        raise AttributeError(
            "{} already defined in logging module".format(level_name)
        )
    if hasattr(logging, method_name):
        raise AttributeError(
            "{} already defined in logging module".format(method_name)
        )
    if hasattr(logging.getLoggerClass(), method_name):
        raise AttributeError(
            "{} already defined in logger class".format(method_name)
        )

    def log_for_level(self, message, *args, **kwargs):
        if self.isEnabledFor(level_num):
            self._log(level_num, message, args, **kwargs)

    def log_to_root(message, *args, **kwargs):
        logging.log(level_num, message, *args, **kwargs)

    logging.addLevelName(level_num, level_name)
    setattr(logging, level_name, level_num)
    setattr(logging.getLoggerClass(), method_name, log_for_level)
    setattr(logging, method_name, log_to_root)


if not hasattr(logging, "TRACE"):
    _add_logging_level("TRACE", 5)


def get_logger_no(log_level):
    return logging.getLevelName(log_level)


def get_logger(name=None):
    name = name or "corrcoh"
    _logger = logging.getLogger(name)
    _logger.setLevel(get_logger_no(Settings.LOG_LEVEL))
    return _logger


def set_level(log_level: str):
    """Re-level every logger created through :func:`get_logger`."""
    level = get_logger_no(log_level.upper())
    for name_ in list(logging.root.manager.loggerDict):
        _logger = logging.getLogger(name_)
        if _logger.level != logging.NOTSET:
            _logger.setLevel(level)


def _short_repr(value, limit=120):
    text_ = repr(value)
    if len(text_) > limit:
        text_ = text_[: limit - 3] + "..."
    return text_


# noinspection PyUnresolvedReferences
def call_log(
    logger: logging.Logger,
    enter_level=logging.TRACE,
    exit_level=logging.TRACE,
    args_level=logging.TRACE,
    ret_level=logging.TRACE,
):
    def _decorator(func):
        def _prep():
            # child loggers are never released, only make them when traced
            if not logger.isEnabledFor(
                min(enter_level, exit_level, args_level, ret_level)
            ):
                return logger
            _uid = uuid.uuid4().hex[:8]
            _fn_logger = logger.getChild(f"{func.__name__}({_uid})")
            return _fn_logger

        def _pre_call(_fn_logger, *args, **kwargs):
            _fn_logger.log(enter_level, "enter")
            if _fn_logger.isEnabledFor(args_level):
                args_ = [_short_repr(x) for x in args]
                kwargs_ = {k: _short_repr(v) for k, v in kwargs.items()}
                _fn_logger.log(args_level, f"args={args_} kwargs={kwargs_}")

        def _post_call(_fn_logger, _ret):
            if _fn_logger.isEnabledFor(ret_level):
                _fn_logger.log(ret_level, f"return {_short_repr(_ret)}")
            _fn_logger.log(exit_level, "exit")

        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            _fn_logger = _prep()
            _pre_call(_fn_logger, *args, **kwargs)
            _ret = func(*args, **kwargs)
            _post_call(_fn_logger, _ret)
            return _ret

        return wrapper

    return _decorator


logging.basicConfig(
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
)
