"""
Validation of experiment files. Every config section is a Django form, errors are collected under dotted field
paths (``grid.horizon``) and raised together as ConfigInvalidException.
"""
import numpy as np

from django import forms
from django.core.exceptions import NON_FIELD_ERRORS, ValidationError

from pdldp.coefficients.builtin import get_builtin_spec
from pdldp.coefficients.grid import Path, TimeGrid
from pdldp.coefficients.maps import map_from_descriptor
from pdldp.coefficients.parser import FeatureParser, FeatureParserError
from pdldp.coefficients.spec import CoefficientSpec, EpsilonFamily
from pdldp.exception import ConfigInvalidException, PdldpException
from pdldp.rate import OptimizerConfig, EventParserError, get_event
from pdldp.rate.optimizer import GradientMethod, OptimizationMethod
from pdldp.simulation.noise import SmallNoiseSchedule
from pdldp.skeleton import Control
from pdldp.small_time import FunctionalSpec
from pdldp.utils import StrEnum, as_matrix, as_vector


class ExperimentMode(StrEnum):

    SIMULATE = 'simulate'
    SKELETON = 'skeleton'
    RATE = 'rate'
    VERIFY = 'verify'
    SMALLTIME = 'smalltime'
    DELTA = 'delta'


class McMethod(StrEnum):

    PLAIN = 'plain'
    IMPORTANCE = 'importance'
    BOTH = 'both'


def _choices(enum):
    return [(str(value), str(value)) for value in enum]


def _join_path(*parts):
    return '.'.join(part for part in parts if part)


class JsonValueField(forms.Field):
    """
    Field keeping a decoded JSON value (number, list, object or string) untouched.
    """

    def to_python(self, value):
        return value


class VectorField(JsonValueField):

    def to_python(self, value):
        if value in self.empty_values:
            return None
        try:
            return as_vector(value, name='value')
        except PdldpException as ex:
            raise ValidationError(str(ex))


class ScheduleField(JsonValueField):
    """
    List of [epsilon, theta] pairs, or {"thetas": [...]} with epsilon = theta^2, or {"epsilons": [...]} with
    theta = sqrt(epsilon).
    """

    def to_python(self, value):
        if value in self.empty_values:
            return None
        try:
            if isinstance(value, dict):
                if set(value) == {'thetas'}:
                    return SmallNoiseSchedule.from_thetas(value['thetas'])
                elif set(value) == {'epsilons'}:
                    return SmallNoiseSchedule([(epsilon, float(np.sqrt(epsilon))) for epsilon in value['epsilons']])
                raise ValidationError('Schedule object must contain only "thetas" or only "epsilons".')
            return SmallNoiseSchedule(value)
        except (PdldpException, TypeError, ValueError) as ex:
            raise ValidationError('Invalid schedule: {}'.format(ex))


class EventField(JsonValueField):

    def to_python(self, value):
        if value in self.empty_values:
            return None
        try:
            return get_event(value)
        except (EventParserError, PdldpException) as ex:
            raise ValidationError(str(ex))


class ConfigSectionForm(forms.Form):
    """
    Form of one config section, keys without a form field are rejected.
    """

    def __init__(self, data, path=''):
        self.path = path
        self.is_mapping = isinstance(data, dict)
        super().__init__(data=data if self.is_mapping else {})

    def clean(self):
        cleaned_data = super().clean()
        unknown = sorted(set(self.data) - set(self.fields))
        if unknown:
            raise ValidationError('Unknown keys: {}.'.format(', '.join(unknown)))
        return cleaned_data

    def get_errors(self):
        if not self.is_mapping:
            return {self.path or 'config': ['Must be an object.']}
        return {
            self.path or 'config' if field == NON_FIELD_ERRORS else _join_path(self.path, field): list(messages)
            for field, messages in self.errors.items()
        }

    def _get_value(self):
        raise NotImplementedError

    def get_value(self):
        """
        Validates the section and returns its domain object.

        :raise ConfigInvalidException: with all errors of the section.
        """
        if not self.is_mapping or not self.is_valid():
            raise ConfigInvalidException(self.get_errors())
        try:
            return self._get_value()
        except ConfigInvalidException:
            raise
        except PdldpException as ex:
            raise ConfigInvalidException({self.path or 'config': [str(ex)]})


class GridForm(ConfigSectionForm):

    horizon = forms.FloatField(min_value=0)
    n_steps = forms.IntegerField(min_value=1)

    def _get_value(self):
        return TimeGrid(self.cleaned_data['horizon'], self.cleaned_data['n_steps'])


class McForm(ConfigSectionForm):

    n_samples = forms.IntegerField(min_value=1, required=False)
    seed = forms.IntegerField(min_value=0, required=False)
    method = forms.ChoiceField(choices=_choices(McMethod), required=False)

    def _get_value(self):
        return {
            'n_samples': self.cleaned_data['n_samples'] or 10000,
            'seed': self.cleaned_data['seed'] or 0,
            'method': McMethod(self.cleaned_data['method'] or McMethod.PLAIN),
        }


class OptimizerForm(ConfigSectionForm):

    max_iters = forms.IntegerField(min_value=1, required=False)
    penalty_initial = forms.FloatField(min_value=0, required=False)
    penalty_growth = forms.FloatField(min_value=1, required=False)
    penalty_rounds = forms.IntegerField(min_value=1, required=False)
    step_size = forms.FloatField(min_value=0, required=False)
    gtol = forms.FloatField(min_value=0, required=False)
    feasibility_tolerance = forms.FloatField(min_value=0, required=False)
    gradient = forms.ChoiceField(choices=_choices(GradientMethod), required=False)
    method = forms.ChoiceField(choices=_choices(OptimizationMethod), required=False)
    control_bound = forms.FloatField(min_value=0, required=False)

    def _get_value(self):
        return OptimizerConfig(**{
            key: value for key, value in self.cleaned_data.items() if value not in self.fields[key].empty_values
        })


class EpsilonFamilyForm(ConfigSectionForm):

    drift = JsonValueField(required=False)
    diffusion = JsonValueField(required=False)
    initial_shift = VectorField(required=False)

    def __init__(self, data, path, dim_state, dim_noise, input_size):
        super().__init__(data, path)
        self.dim_state = dim_state
        self.dim_noise = dim_noise
        self.input_size = input_size

    def _get_map(self, key, shape):
        value = self.cleaned_data[key]
        return None if value is None else map_from_descriptor(value, shape, self.input_size)

    def _get_value(self):
        return EpsilonFamily(
            self._get_map('drift', (self.dim_state,)),
            self._get_map('diffusion', (self.dim_state, self.dim_noise)),
            self.cleaned_data['initial_shift'],
        )


class SpecForm(ConfigSectionForm):
    """
    Either {"builtin": name} or an explicit definition:
        {"dim_state": 1, "features": "x, max(x)", "drift": {...}, "diffusion": 1, "growth_const": 1}
    """

    builtin = forms.CharField(required=False)
    name = forms.CharField(required=False)
    dim_state = forms.IntegerField(min_value=1, required=False)
    dim_noise = forms.IntegerField(min_value=1, required=False)
    features = JsonValueField(required=False)
    drift = JsonValueField(required=False)
    diffusion = JsonValueField(required=False)
    growth_const = forms.FloatField(min_value=0, required=False)
    lipschitz_const = JsonValueField(required=False)
    epsilon_family = JsonValueField(required=False)

    explicit_fields = ('dim_state', 'dim_noise', 'features', 'drift', 'diffusion', 'growth_const', 'lipschitz_const')
    required_fields = ('dim_state', 'features', 'drift', 'diffusion', 'growth_const')

    def clean(self):
        cleaned_data = super().clean()
        if cleaned_data.get('builtin'):
            for field in self.explicit_fields:
                if cleaned_data.get(field) not in self.fields[field].empty_values:
                    self.add_error(field, 'Cannot be combined with a built-in spec.')
        else:
            for field in self.required_fields:
                if field not in self._errors and cleaned_data.get(field) in self.fields[field].empty_values:
                    self.add_error(field, self.fields[field].error_messages['required'])
            features = cleaned_data.get('features')
            if features not in self.fields['features'].empty_values:
                try:
                    cleaned_data['features'] = FeatureParser().parse(features)
                except FeatureParserError as ex:
                    self.add_error('features', str(ex))
        return cleaned_data

    def _get_explicit_spec(self):
        data = self.cleaned_data
        dim_state = data['dim_state']
        dim_noise = data['dim_noise'] or dim_state
        input_size = len(data['features']) * dim_state
        maps = {}
        for key, shape in (('drift', (dim_state,)), ('diffusion', (dim_state, dim_noise))):
            try:
                maps[key] = map_from_descriptor(data[key], shape, input_size)
            except PdldpException as ex:
                raise ConfigInvalidException({_join_path(self.path, key): [str(ex)]})
        return CoefficientSpec(
            dim_state, dim_noise, data['features'], maps['drift'], maps['diffusion'], data['growth_const'],
            data['lipschitz_const'], name=data['name'] or None
        )

    def _get_value(self):
        if self.cleaned_data['builtin']:
            spec = get_builtin_spec(self.cleaned_data['builtin'])
        else:
            spec = self._get_explicit_spec()
        if self.cleaned_data['epsilon_family'] is not None:
            family = EpsilonFamilyForm(
                self.cleaned_data['epsilon_family'], _join_path(self.path, 'epsilon_family'),
                spec.dim_state, spec.dim_noise, spec.features.size
            ).get_value()
            spec = spec.with_epsilon_family(family)
        return spec


class TargetPath:
    """
    Target path of the experiment file, built on the experiment grid from its start point.
    """

    def __init__(self, end=None, velocity=None, values=None):
        self.end = end
        self.velocity = velocity
        self.values = values

    def build(self, grid, start):
        start = np.asarray(start, dtype=float)
        if self.end is not None:
            return Path.straight_line(grid, start, self.end)
        elif self.velocity is not None:
            return Path(grid, start[None, :] + grid.times[:, None] * self.velocity[None, :])
        else:
            return Path(grid, self.values)


class TargetForm(ConfigSectionForm):
    """
    {"end": [1]} straight line to the end point, {"velocity": [1]} the line start + velocity t or
    {"values": [[...], ...]} explicit rows on the grid.
    """

    end = VectorField(required=False)
    velocity = VectorField(required=False)
    values = JsonValueField(required=False)

    def clean(self):
        cleaned_data = super().clean()
        given = [key for key in ('end', 'velocity', 'values') if cleaned_data.get(key) is not None]
        if len(given) != 1:
            raise ValidationError('Exactly one of "end", "velocity" or "values" is required.')
        if cleaned_data.get('values') is not None:
            try:
                cleaned_data['values'] = as_matrix(cleaned_data['values'], name='target values')
            except PdldpException as ex:
                self.add_error('values', str(ex))
        return cleaned_data

    def _get_value(self):
        return TargetPath(**self.cleaned_data)


class ControlForm(ConfigSectionForm):
    """
    {"constant": [0.5]} or {"values": [[...], ...]} with one row per grid interval.
    """

    constant = VectorField(required=False)
    values = JsonValueField(required=False)

    def clean(self):
        cleaned_data = super().clean()
        if (cleaned_data.get('constant') is None) == (cleaned_data.get('values') is None):
            raise ValidationError('Exactly one of "constant" or "values" is required.')
        return cleaned_data

    def _get_value(self):
        constant = self.cleaned_data['constant']
        values = self.cleaned_data['values']
        return lambda grid: Control.constant(grid, constant) if constant is not None else Control(grid, values)


class FunctionalForm(ConfigSectionForm):

    jacobian = JsonValueField()
    map = JsonValueField(required=False)
    name = forms.CharField(required=False)

    def _get_value(self):
        return FunctionalSpec.from_descriptor(
            self.cleaned_data['jacobian'], self.cleaned_data['map'], self.cleaned_data['name'] or None
        )


class ExperimentForm(ConfigSectionForm):

    spec = JsonValueField()
    x0 = VectorField()
    grid = JsonValueField()
    schedule = ScheduleField(required=False)
    event = EventField(required=False)
    optimizer = JsonValueField(required=False)
    mc = JsonValueField(required=False)
    mode = forms.ChoiceField(choices=_choices(ExperimentMode), required=False)
    output_dir = forms.CharField(required=False)
    target = JsonValueField(required=False)
    functional = JsonValueField(required=False)
    control = JsonValueField(required=False)
    n_paths = forms.IntegerField(min_value=1, required=False)

    mode_requirements = {
        ExperimentMode.SIMULATE: ('schedule',),
        ExperimentMode.SKELETON: (),
        ExperimentMode.RATE: ('event',),
        ExperimentMode.VERIFY: ('event', 'schedule'),
        ExperimentMode.SMALLTIME: ('schedule',),
        ExperimentMode.DELTA: ('functional', 'target'),
    }

    sections = {
        'spec': SpecForm,
        'grid': GridForm,
        'optimizer': OptimizerForm,
        'mc': McForm,
        'target': TargetForm,
        'functional': FunctionalForm,
        'control': ControlForm,
    }

    def check_mode(self, mode):
        errors = {}
        if mode is None:
            errors['mode'] = ['This field is required.']
        else:
            for field in self.mode_requirements[mode]:
                if self.data.get(field) in self.fields[field].empty_values:
                    errors[field] = ['This field is required for mode {}.'.format(mode)]
        return errors


class ExperimentConfig:

    def __init__(self, mode, spec, x0, grid, schedule, event, optimizer, mc, output_dir, target, functional, control,
                 n_paths, resolved):
        self.mode = mode
        self.spec = spec
        self.x0 = x0
        self.grid = grid
        self.schedule = schedule
        self.event = event
        self.optimizer = optimizer
        self.mc = mc
        self.output_dir = output_dir
        self.target = target
        self.functional = functional
        self.control = control
        self.n_paths = n_paths
        self.resolved = resolved

    @property
    def seed(self):
        return self.mc['seed']


def clean_config(data, mode=None, seed=None, output_dir=None):
    """
    Validates decoded experiment data, command line values override the file.

    :return: ExperimentConfig.
    :raise ConfigInvalidException: every problem found, keyed by dotted field path.
    """
    form = ExperimentForm(data)
    if not form.is_mapping or not form.is_valid():
        raise ConfigInvalidException(form.get_errors())

    cleaned_data = form.cleaned_data
    mode = ExperimentMode(mode or cleaned_data['mode']) if (mode or cleaned_data['mode']) else None
    errors = form.check_mode(mode)

    values = {}
    for key, section_form_class in ExperimentForm.sections.items():
        if key not in data:
            continue
        try:
            values[key] = section_form_class(data[key], key).get_value()
        except ConfigInvalidException as ex:
            errors.update(ex.errors)
    if errors:
        raise ConfigInvalidException(errors)

    spec, x0, event = values['spec'], cleaned_data['x0'], cleaned_data['event']
    if x0.shape[0] != spec.dim_state:
        errors['x0'] = ['Must have dimension {}.'.format(spec.dim_state)]
    if event is not None and event.dim not in (None, spec.dim_state):
        errors['event'] = ['Event has dimension {} but the state has dimension {}.'.format(event.dim, spec.dim_state)]
    if errors:
        raise ConfigInvalidException(errors)

    optimizer = values.get('optimizer') or OptimizerConfig()
    mc = values.get('mc') or McForm({}).get_value()
    if seed is not None:
        mc['seed'] = seed
    schedule = cleaned_data['schedule']
    grid = values['grid']

    resolved = {
        'mode': str(mode),
        'spec': data['spec'],
        'x0': x0.tolist(),
        'grid': {'horizon': grid.horizon, 'n_steps': grid.n_steps},
        'optimizer': optimizer.to_dict(),
        'mc': mc,
    }
    if schedule is not None:
        resolved['schedule'] = [list(entry) for entry in schedule]
    if event is not None:
        resolved['event'] = event.to_descriptor()
    for key in ('target', 'functional', 'control', 'n_paths'):
        if data.get(key) is not None:
            resolved[key] = data[key]

    return ExperimentConfig(
        mode, spec, x0, grid, schedule, event, optimizer, mc, output_dir or cleaned_data['output_dir'] or None,
        values.get('target'), values.get('functional'), values.get('control'), cleaned_data['n_paths'] or 5,
        resolved
    )
