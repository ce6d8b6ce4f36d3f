from django.conf import settings as django_settings


CONVERTERS = (
    'pdldp.converters.CsvConverter',
    'pdldp.converters.JsonConverter',
)

SPEC_REGISTRY = (
    'pdldp.coefficients.builtin.schilder',
    'pdldp.coefficients.builtin.ornstein_uhlenbeck',
    'pdldp.coefficients.builtin.running_max_feedback',
    'pdldp.coefficients.builtin.delayed_sigmoid',
    'pdldp.coefficients.builtin.planar_delay',
)

OPTIMIZER = {
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
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        }
    },
    'loggers': {
        'pdldp': {
            'handlers': ['console'],
            'level': 'INFO',
            'propagate': False,
        },
    }
}


DEFAULTS = {
    'CONVERTERS': CONVERTERS,
    'SPEC_REGISTRY': SPEC_REGISTRY,
    'OPTIMIZER': OPTIMIZER,
    'LOGGING': LOGGING,
    'DIVERGENCE_THRESHOLD': 1e12,
    'FEASIBILITY_TOLERANCE': 1e-6,
    'INITIAL_VALUE_TOLERANCE': 1e-9,
    'MC_CHUNK_SIZE': 4096,
    'CONFIDENCE_LEVEL': 0.05,
    'SLOPE_FIT_DEGREE': 2,
    'FINITE_DIFFERENCE_STEP': 1e-6,
    'TERMINAL_POINT_TOLERANCE': 1e-3,
    'CSV_GENERATOR_OPTIONS': {
        'delimiter': ',',
        'use_bom': False,
    },
    'JSON_CONVERTER_OPTIONS': {
        'indent': 4,
        'sort_keys': True,
    },
}


class Settings:

    def __getattr__(self, attr):
        if attr not in DEFAULTS:
            raise AttributeError('Invalid Pdldp setting: "{}"'.format(attr))

        if not django_settings.configured:
            return DEFAULTS[attr]
        return getattr(django_settings, 'PDLDP_{}'.format(attr), DEFAULTS[attr])


settings = Settings()
