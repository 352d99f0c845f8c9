from typing import Optional
from pydantic_settings import BaseSettings
from dotenv import load_dotenv
from pathlib import Path

# load an .env file if it exists
load_dotenv()


BASE = Path.cwd() / 'out'


# load the settings from environment variables
class Settings(BaseSettings):
	# base directory for every artifact the benchmark writes
	OUTPUT_DIR: str = str(BASE)
	DEV_MODE: bool = False
	CONCURRENT_TASKS: int = 2

	# directly specify the locations below the output directory
	RECORDS_DIR: str = 'records'
	TRAJECTORY_DIR: str = 'trajectories'

	# integrator defaults
	ODE_RTOL: float = 1e-8
	ODE_ATOL: float = 1e-10
	ODE_MAX_STEPS: int = 200_000
	# any state component beyond this magnitude counts as a blow-up
	ODE_STATE_LIMIT: float = 1e8

	# structural comparison of expressions
	COEFF_EPSILON: float = 1e-9
	COEFF_RTOL: float = 0.05

	# trajectory comparison
	WILCOXON_ALPHA: float = 0.05
	WILCOXON_POINTS: int = 100
	WILCOXON_EXACT_MAX_N: int = 25

	# plot caps, the data files keep raw values
	INV_LOG_MAE_CAP: float = 10.0
	R2_FLOOR: float = -2.0

	# monitoring
	LOGFIRE_TOKEN: Optional[str] = None


settings = Settings()
