# Django settings.
import os

PROJECT_DIR = os.path.abspath(
    os.path.join(os.path.dirname(__file__), '..', '..')
)

DEBUG = False

# Local time zone for this installation. Choices can be found here:
# http://en.wikipedia.org/wiki/List_of_tz_zones_by_name
TIME_ZONE = 'Europe/Prague'

LANGUAGE_CODE = 'en'

# Experiment reports are machine readable, no translations are loaded.
USE_I18N = False

# If you set this to False, Django will not use timezone-aware datetimes.
USE_TZ = True

# Make this unique, and don't share it with anybody.
SECRET_KEY = 'xe8vyy&0cw*&za++fq(%w6cx=)k53*m-@$1&pst=*oe(b#zgo+'

INSTALLED_APPS = (
    # apps
    'app',

    # Django-pdldp (large deviations toolkit)
    'pdldp',
)

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s'
        }
    },
    'handlers': {
        'console': {
            'level': 'WARNING',
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        }
    },
    'loggers': {
        'pdldp': {
            'handlers': ['console'],
            'level': 'WARNING',
            'propagate': False,
        },
    }
}

PDLDP_MC_CHUNK_SIZE = 8192
PDLDP_OPTIMIZER = {
    'max_iters': 200,
    'penalty_initial': 10.0,
    'penalty_growth': 10.0,
    'penalty_rounds': 6,
    'step_size': 1.0,
    'gtol': 1e-9,
    'feasibility_tolerance': 1e-4,
    'gradient': 'adjoint',
    'method': 'lbfgsb',
    'control_bound': 1e3,
}
