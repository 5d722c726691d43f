"""Exception taxonomy shared by all pipeline modules.

Every error carries a stable machine-readable ``code`` so the HTTP layer
can map failures without string matching.
"""

from __future__ import annotations


class SurftreatError(Exception):
    code = "internal_error"


class ParseError(SurftreatError):
    code = "parse_error"

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnitError(SurftreatError):
    code = "unit_error"


class InvalidParameter(SurftreatError):
    code = "invalid_parameter"


class DegenerateInput(SurftreatError):
    code = "degenerate_input"


class EmptyCloud(SurftreatError):
    code = "empty_cloud"


class InsufficientPoints(SurftreatError):
    code = "insufficient_points"


class MissingLineIndex(SurftreatError):
    code = "missing_line_index"


class MissingNormals(SurftreatError):
    code = "missing_normals"


class EmptyBand(SurftreatError):
    code = "empty_band"


class NoContours(SurftreatError):
    code = "no_contours"


class NoContactWaypoints(SurftreatError):
    code = "no_contact_waypoints"


class NotProjectivelyPlanar(SurftreatError):
    code = "not_projectively_planar"


class EmptyTrajectory(SurftreatError):
    code = "empty_trajectory"


class UnknownRule(SurftreatError):
    code = "unknown_rule"


class ConsistencyError(SurftreatError):
    code = "consistency_error"


class AmbiguousSuccessor(SurftreatError):
    code = "ambiguous_successor"


class NoSuccessor(SurftreatError):
    code = "no_successor"


class ProtocolError(SurftreatError):
    code = "protocol_error"


class MissingInput(SurftreatError):
    code = "missing_input"


class UnknownRun(SurftreatError):
    code = "unknown_run"
