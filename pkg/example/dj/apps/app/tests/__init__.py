from .coefficients import *
from .simulation import *
from .skeleton import *
from .rate import *
from .small_time import *
from .verify import *
from .experiment import *
