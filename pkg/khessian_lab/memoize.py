#    Licensed under the Apache License, Version 2.0 (the "License"); you may
#    not use this file except in compliance with the License. You may obtain
#    a copy of the License at
#
#         http://www.apache.org/licenses/LICENSE-2.0
#
#    Unless required by applicable law or agreed to in writing, software
#    distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
#    WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
#    License for the specific language governing permissions and limitations
#    under the License.

"""Per-object caching of lazily built components and grids."""

from functools import wraps


def _object_cache(obj):
    try:
        return obj._cache

    except AttributeError:
        obj._cache = {}
        return obj._cache


def memoize():
    """Cache the return value of the decorated method per instance.

    Arguments must be hashable.

    :return: decorated function
    """

    def decorator(method):

        @wraps(method)
        def wrapped(self, *args, **kwargs):
            entries = _object_cache(self).setdefault(method.__name__, {})
            cache_key = tuple(args), tuple(sorted(kwargs.items()))
            if cache_key not in entries:
                entries[cache_key] = method(self, *args, **kwargs)
            return entries[cache_key]

        return wrapped

    return decorator


def forget(obj):
    """Drop every cached result of `obj`."""
    _object_cache(obj).clear()
