"""Terminal sets, outcome classification, and the closed-form winning
conditions of the pursuit game for hovering initial states.

For zero initial velocities the anomaly-by-anomaly capture and interception
conditions reduce to quadratics in the defender's initial position, i.e.
ellipsoid membership tests built from position sub-blocks of the D matrix.
"""

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .game import _d_grid

_SINGULAR_COND = 1e14


class SingularBlock(RuntimeError):
    """A position sub-block of D needed by the winning conditions is
    numerically singular."""

    def __init__(self, message, f=None, cond=None):
        super().__init__(message)
        self.f = f
        self.cond = cond


class NotHovering(ValueError):
    """The winning conditions require zero initial velocities."""


@dataclass(frozen=True)
class TerminalSets:
    """Capture radius r1 around the target, interception radius r2 around
    the pursuer, km."""

    r1: float
    r2: float

    def __post_init__(self):
        if not self.r1 > 0 or not self.r2 > 0:
            raise ValueError(f"radii must be positive, got r1={self.r1!r}, r2={self.r2!r}")


class OutcomeTag(enum.Enum):
    ATTACKER_WINS = "AttackerWins"
    DEFENDER_WINS = "DefenderWins"
    SIMULTANEOUS_CAPTURE = "SimultaneousCapture"
    NOBODY_WINS = "NobodyWins"


@dataclass(frozen=True)
class Outcome:
    """Game outcome with the first-hit anomalies where applicable."""

    tag: OutcomeTag
    f_capture: Optional[float] = None
    f_intercept: Optional[float] = None


@dataclass(frozen=True)
class Ellipsoid:
    """Quadratic membership set {r : q(r) <= 0} with Gram matrix g = m^T m,
    center offset (km) and radius (km)."""

    g: np.ndarray
    center_offset: np.ndarray
    radius: float
    m: np.ndarray

    def q(self, point):
        """Evaluate the defining quadratic at a 3-vector (or stack)."""
        point = np.asarray(point, dtype=float)
        c = self.center_offset
        return (
            np.einsum("...i,ij,...j->...", point, self.g, point)
            - 2.0 * np.einsum("i,ij,...j->...", c, self.g, point)
            + c @ self.g @ c
            - self.radius**2
        )


def classify_outcome(trajectory, sets):
    """Scan the trajectory grid after the initial node and report the first
    terminal-set hit.  Both sets hit at the same sample means a tie."""
    hit1 = trajectory.dist_at[1:] <= sets.r1
    hit2 = trajectory.dist_da[1:] <= sets.r2
    i1 = int(np.argmax(hit1)) + 1 if np.any(hit1) else None
    i2 = int(np.argmax(hit2)) + 1 if np.any(hit2) else None
    grid = trajectory.grid
    if i1 is not None and (i2 is None or i1 < i2):
        return Outcome(tag=OutcomeTag.ATTACKER_WINS, f_capture=float(grid[i1]))
    if i2 is not None and (i1 is None or i2 < i1):
        return Outcome(tag=OutcomeTag.DEFENDER_WINS, f_intercept=float(grid[i2]))
    if i1 is not None:
        return Outcome(
            tag=OutcomeTag.SIMULTANEOUS_CAPTURE,
            f_capture=float(grid[i1]),
            f_intercept=float(grid[i2]),
        )
    return Outcome(tag=OutcomeTag.NOBODY_WINS)


def _require_hovering(config):
    if np.any(config.x_a0[3:] != 0.0) or np.any(config.x_da0[3:] != 0.0):
        raise NotHovering(
            "winning conditions require hovering initial states "
            "(zero velocity blocks in x_a0 and x_da0)"
        )


def _gram_pieces(d_stack, f_values, which):
    """Gram matrices and center offsets for a stack of D matrices.

    which=1 builds the capture quadratic from (D11rr, D12rr), which=2 the
    interception quadratic from (D21rr, D22rr).  Returns (gram, own, cross)
    where own is the block inverted and cross the companion block."""
    if which == 1:
        own = d_stack[..., 0:3, 6:9]
        cross = d_stack[..., 0:3, 0:3]
    else:
        own = d_stack[..., 6:9, 6:9]
        cross = d_stack[..., 6:9, 0:3]
    cond = np.linalg.cond(own)
    bad = (cond > _SINGULAR_COND) | ~np.isfinite(cond)
    if np.any(bad):
        idx = int(np.argmax(bad))
        f_bad = float(np.asarray(f_values).ravel()[idx]) if np.ndim(f_values) else float(f_values)
        c_bad = float(np.asarray(cond).ravel()[idx]) if np.ndim(cond) else float(cond)
        label = "capture" if which == 1 else "interception"
        raise SingularBlock(
            f"position block of the {label} condition is singular at "
            f"f={f_bad:.9g} (condition estimate {c_bad:.3e})",
            f=f_bad,
            cond=c_bad,
        )
    gram = np.swapaxes(own, -1, -2) @ own
    return gram, own, cross


def _centers(own, cross, ra0):
    """Center offsets r_tilde = Ra0 - own^-1 cross Ra0, batched."""
    rhs = np.einsum("...ij,j->...i", cross, ra0)
    sol = np.linalg.solve(own, rhs[..., None])[..., 0]
    return ra0 - sol


def _quadratic(gram, center, rd0):
    diff_free = np.einsum("...i,...ij,...j->...", rd0, gram, rd0)
    cross = np.einsum("...i,...ij,...j->...", center, gram, rd0)
    offs = np.einsum("...i,...ij,...j->...", center, gram, center)
    return diff_free - 2.0 * cross + offs


def g1(config, f, rd0):
    """Capture quadratic at anomaly f for defender initial position rd0.

    Nonpositive values mean the pursuer reaches the capture ball at f."""
    _require_hovering(config)
    d = _d_grid(config, float(f))
    gram, own, cross = _gram_pieces(d, float(f), 1)
    center = _centers(own, cross, config.x_a0[:3])
    rd0 = np.asarray(rd0, dtype=float)
    return float(_quadratic(gram, center, rd0) - config.r1**2)


def g2(config, f, rd0):
    """Interception quadratic at anomaly f for defender initial position rd0.

    Positive values mean the defender has not reached the pursuer at f."""
    _require_hovering(config)
    d = _d_grid(config, float(f))
    gram, own, cross = _gram_pieces(d, float(f), 2)
    center = _centers(own, cross, config.x_a0[:3])
    rd0 = np.asarray(rd0, dtype=float)
    return float(_quadratic(gram, center, rd0) - config.r2**2)


def _scan_tables(config):
    """Precompute per-node Gram matrices and centers over the open grid
    (f0, ff] for batch evaluation of the two quadratics."""
    _require_hovering(config)
    fs = config.grid[1:]
    d = _d_grid(config, fs)
    g1m, own1, cross1 = _gram_pieces(d, fs, 1)
    g2m, own2, cross2 = _gram_pieces(d, fs, 2)
    ra0 = config.x_a0[:3]
    return {
        "f": fs,
        "g1": g1m,
        "c1": _centers(own1, cross1, ra0),
        "g2": g2m,
        "c2": _centers(own2, cross2, ra0),
        "r1": config.r1,
        "r2": config.r2,
    }


def _scan_values(tables, rd0):
    """(g1, g2) arrays over the scan grid for one defender position."""
    rd0 = np.asarray(rd0, dtype=float)
    v1 = _quadratic(tables["g1"], tables["c1"], rd0) - tables["r1"] ** 2
    v2 = _quadratic(tables["g2"], tables["c2"], rd0) - tables["r2"] ** 2
    return v1, v2


def scan_quadratics(config):
    """Both quadratics sampled over the grid after f0.

    Returns (f, g1_values, g2_values) arrays over (f0, ff] for the
    configured defender initial position."""
    tables = _scan_tables(config)
    rd0 = config.x_a0[:3] + config.x_da0[:3]
    v1, v2 = _scan_values(tables, rd0)
    return tables["f"], v1, v2


def attacker_wins(config):
    """Closed-form winning test for the pursuer.

    Scans the grid after f0 for the first anomaly f_a with g1(f_a) <= 0 and
    requires g2 > 0 everywhere up to and including f_a.  Returns
    (wins, f_a); f_a is None when the pursuer never wins."""
    fs, v1, v2 = scan_quadratics(config)
    hits = v1 <= 0.0
    if not np.any(hits):
        return False, None
    i = int(np.argmax(hits))
    if np.all(v2[: i + 1] > 0.0):
        return True, float(fs[i])
    return False, None


def winning_set_membership(config, rd0):
    """Whether the defender initial position rd0 lets the pursuer win."""
    wins, _ = attacker_wins(config.with_defender_position(rd0))
    return wins


def ellipsoid_at(config, f, which):
    """Explicit ellipsoid record of the capture ("S1") or interception
    ("S2") set at anomaly f, for geometric export."""
    _require_hovering(config)
    if which not in ("S1", "S2"):
        raise ValueError(f'which must be "S1" or "S2", got {which!r}')
    d = _d_grid(config, float(f))
    idx = 1 if which == "S1" else 2
    gram, own, cross = _gram_pieces(d, float(f), idx)
    center = _centers(own, cross, config.x_a0[:3])
    radius = config.r1 if which == "S1" else config.r2
    return Ellipsoid(g=gram, center_offset=center, radius=float(radius), m=own)
