"""Exception hierarchy shared by all pipeline stages."""


class SpatialRugsError(Exception):
    """Base class for every error raised by this package."""


class MissingColumn(SpatialRugsError):
    pass


class RaggedPanel(SpatialRugsError):
    def __init__(self, frame, mover_id, source=None):
        self.frame = frame
        self.mover_id = mover_id
        where = f"{source}: " if source else ""
        super().__init__(f"{where}mover {mover_id!r} missing from frame {frame}")


class NonFiniteCoordinate(SpatialRugsError):
    pass


class EmptyInput(SpatialRugsError):
    pass


class FrameGap(SpatialRugsError):
    pass


class SingleFrame(SpatialRugsError):
    pass


class PositionOutsideExtent(SpatialRugsError):
    pass


class ShapeMismatch(SpatialRugsError):
    pass


class UnknownFeature(SpatialRugsError):
    pass


class ConfigError(SpatialRugsError):
    pass
