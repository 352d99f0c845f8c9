from .trajectory import Trajectory
from .dopri import dormand_prince, integrate
from .differentiation import add_noise, finite_difference
