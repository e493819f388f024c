"""Component object model.

Every extensible feature (logger, progress reporter, parallel executor, convolution
backend) is an implementation of an interface registered under a name of the form
``interface::implementation``. Instances are created with :func:`create` and
configured through :meth:`Component.construct` with a plain dict of properties.
"""
from .exception import ArgumentError

_registry = {}


class Component:
    """Base class of all components"""

    @classmethod
    def reg(cls, impl, name):
        """Register ``impl`` (a subclass of ``cls``) under ``name``"""
        if not issubclass(impl, cls):
            raise ArgumentError(
                'Component must derive from its interface [name=\'{}\', interface=\'{}\']'.format(
                    name, cls.__name__))
        _registry[name] = impl

    def construct(self, prop):
        """Initialize the instance with properties. Returns False on invalid properties."""
        return True


def ssc_component(name):
    """Decorator for registering a class as a component"""
    def ssc_component_(object):
        base = object.__bases__[0]
        base.reg(object, name)
        return object
    return ssc_component_


def registered(prefix=''):
    """Names of registered implementations starting with ``prefix``"""
    return sorted(k for k in _registry if k.startswith(prefix))


def create(name, prop=None, interface=None):
    """Create and construct a component instance"""
    impl = _registry.get(name)
    if impl is None:
        raise ArgumentError('Unknown component [name=\'{}\']'.format(name))
    if interface is not None and not issubclass(impl, interface):
        raise ArgumentError('Component [name=\'{}\'] does not implement {}'.format(
            name, interface.__name__))
    inst = impl()
    if not inst.construct({} if prop is None else prop):
        raise ArgumentError('Failed to construct component [name=\'{}\']'.format(name))
    return inst
