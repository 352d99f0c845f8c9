import logfire

from shared.settings import settings

# first thing we do is configure logfire, nothing leaves the machine without a token
logfire.configure(
	token=settings.LOGFIRE_TOKEN,
	send_to_logfire='if-token-present',
	console=False,
	environment='development' if settings.DEV_MODE else 'production',
)

# config and record models are validated a lot, only keep the failures
logfire.instrument_pydantic(record='failure')
