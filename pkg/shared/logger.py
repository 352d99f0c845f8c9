import logging

import logfire

from shared import monitoring  # noqa: F401
from shared.__version__ import __version__


# forward records to logfire together with the package version
class LogfireHandler(logfire.LogfireLoggingHandler):
	def emit(self, record: logging.LogRecord) -> None:
		record.__dict__.setdefault('backend_version', __version__)
		super().emit(record)


# create the logger
logger = logging.getLogger('discovery')

# set the log level to debug
logger.setLevel(logging.DEBUG)

# create a stream handler for all messages
console_handler = logging.StreamHandler()
console_handler.setLevel(logging.DEBUG)

logfire_handler = LogfireHandler()
logfire_handler.setLevel(logging.INFO)


# create a formatter for the console handler
console_formatter = logging.Formatter('[%(levelname)s]: %(message)s')

# set the formatter
console_handler.setFormatter(console_formatter)

# add the handlers to the logger
logger.addHandler(console_handler)
logger.addHandler(logfire_handler)
