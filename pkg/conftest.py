# Collection wiring: pytest does not honour testscenarios' load_tests hook,
# so expand WithScenarios classes into one test class per scenario.

import inspect

from _pytest import unittest as pytest_unittest
import testscenarios


def pytest_pycollect_makeitem(collector, name, obj):
    if not (inspect.isclass(obj)
            and issubclass(obj, testscenarios.WithScenarios)
            and getattr(obj, 'scenarios', None)):
        return None
    items = []
    for scenario_name, params in obj.scenarios:
        variant_name = '%s[%s]' % (name, scenario_name)
        variant = type(variant_name, (obj,), dict(params, scenarios=None))
        variant.__module__ = obj.__module__
        setattr(collector.obj, variant_name, variant)
        items.append(pytest_unittest.UnitTestCase.from_parent(
            collector, name=variant_name))
    return items
