"""Exception hierarchy shared by every stage of the pipeline."""


class BreathmagError(Exception):
    """Base class; the CLI maps it to exit code 1."""


# frame I/O
class EmptySequence(BreathmagError, ValueError):
    pass


class MixedDimensions(BreathmagError, ValueError):
    pass


class UnreadableFrame(BreathmagError, OSError):
    pass


class ChannelMismatch(BreathmagError, ValueError):
    pass


# quaternion
class ZeroQuaternion(BreathmagError, ZeroDivisionError):
    pass


class NotUnitNorm(BreathmagError, ValueError):
    pass


# pyramid
class TooSmall(BreathmagError, ValueError):
    pass


class DimMismatch(BreathmagError, ValueError):
    pass


class TooManyLevels(BreathmagError, ValueError):
    pass


# temporal / signal extraction
class InvalidBand(BreathmagError, ValueError):
    pass


class GeometryMismatch(BreathmagError, ValueError):
    pass


# estimator
class FrequencyAtEdge(BreathmagError, ValueError):
    pass


class WindowTooLong(BreathmagError, ValueError):
    pass


# roi
class FrameTooSmall(BreathmagError, ValueError):
    pass


class InsufficientFrames(BreathmagError, ValueError):
    pass


class AllRoisGated(BreathmagError, RuntimeError):
    pass


# synth
class SpecInvalid(BreathmagError, ValueError):
    pass


class OverlappingRegions(SpecInvalid):
    pass


# eval
class LengthMismatch(BreathmagError, ValueError):
    pass


class ZeroReference(BreathmagError, ValueError):
    pass
