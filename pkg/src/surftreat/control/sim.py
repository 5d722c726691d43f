"""Fixed-timestep execution of a tool path under hybrid force-position control.

The pose branch replays the planned path at constant feed; the wrench
branch drives the measured wrench into the allowed region via PID, mapped
through the admittance into a positional offset. One step of transport
delay separates measurement and command, as in a real external controller.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptyTrajectory, InvalidParameter, NoContactWaypoints
from ..geometry.cloud import PointCloud
from ..planner.path import ToolPath, quaternion_to_matrix
from .pid import PidGains, PidState, pid_step
from .plant import PlantConfig, SurfaceModel, contact_force
from .wrench import WrenchRegion, wrench_region_error

CSV_COLUMNS = ["t", "px", "py", "pz", "qw", "qx", "qy", "qz",
               "fx", "fy", "fz", "tx", "ty", "tz", "ez",
               "upx", "upy", "upz",
               "uwfx", "uwfy", "uwfz", "uwtx", "uwty", "uwtz", "kind"]


@dataclass
class Trajectory:
    t: np.ndarray             # (n,)
    position: np.ndarray      # (n, 3) commanded = actual (ideal tracking)
    quaternion: np.ndarray    # (n, 4) wxyz
    wrench: np.ndarray        # (n, 6) measured, tool frame
    error: np.ndarray         # (n, 6) wrench-region error
    u_pose: np.ndarray        # (n, 3) pose-branch increment
    u_wrench: np.ndarray      # (n, 6) PID output
    kind: list[str]           # segment kind per sample
    dt: float = 0.002
    seed: int = 0
    success: bool = True
    failure_reason: str | None = None

    def __len__(self) -> int:
        return len(self.t)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for i in range(len(self.t)):
                row = ([repr(float(self.t[i]))]
                       + [repr(float(x)) for x in self.position[i]]
                       + [repr(float(x)) for x in self.quaternion[i]]
                       + [repr(float(x)) for x in self.wrench[i]]
                       + [repr(float(self.error[i, 2]))]
                       + [repr(float(x)) for x in self.u_pose[i]]
                       + [repr(float(x)) for x in self.u_wrench[i]]
                       + [self.kind[i]])
                writer.writerow(row)


@dataclass
class ControlMetrics:
    mae: float | None
    max_after_rise: float | None
    rise_time: float | None
    success: bool
    failure_reason: str | None = None
    setpoint: float = 0.0
    n_contact_samples: int = 0

    def to_dict(self) -> dict:
        return {"mae_n": self.mae, "max_after_rise_n": self.max_after_rise,
                "rise_time_s": self.rise_time, "success": self.success,
                "failure_reason": self.failure_reason, "setpoint_n": self.setpoint,
                "n_contact_samples": self.n_contact_samples}


def _schedule(path: ToolPath, plant: PlantConfig):
    """Per-step path targets at constant feed (contact) / rapid (free) rates."""
    positions = path.positions()
    kinds = path.kinds()
    quats = np.asarray([w.orientation for w in path.waypoints])
    seg = np.linalg.norm(np.diff(positions, axis=0), axis=1)
    speed = np.asarray([plant.feed_rate if kinds[i + 1] == "contact" else plant.rapid_rate
                        for i in range(len(seg))])
    t_knots = np.concatenate(([0.0], np.cumsum(seg / speed)))
    total = float(t_knots[-1])
    n_steps = int(np.ceil(total / plant.timestep)) + 1
    ts = np.arange(n_steps) * plant.timestep
    targets = np.empty((n_steps, 3))
    for axis in range(3):
        targets[:, axis] = np.interp(ts, t_knots, positions[:, axis])
    # Sample kind/orientation come from the destination waypoint of the
    # interval containing each sample time, except that the approach owns
    # its terminal segment: force control must not engage mid-descent.
    dest = np.minimum(np.searchsorted(t_knots, ts, side="left"), len(positions) - 1)
    dest[0] = 0
    sample_kinds = []
    for i in dest:
        kind = kinds[i]
        if kind == "contact" and i > 0 and kinds[i - 1] == "approach":
            kind = "approach"
        sample_kinds.append(kind)
    sample_quats = quats[dest]
    return ts, targets, sample_kinds, sample_quats


def simulate_execution(path: ToolPath, region: WrenchRegion, gains: PidGains,
                       plant: PlantConfig, seed: int = 0,
                       surface: SurfaceModel | None = None,
                       cloud: PointCloud | None = None):
    """Run the controller against the contact plant; returns (Trajectory, ControlMetrics).

    Deterministic for fixed inputs and seed. Aborts with
    ``ForceLimitExceeded`` when any translational measured force magnitude
    crosses the plant limit.
    """
    if not any(w.kind == "contact" for w in path.waypoints):
        raise NoContactWaypoints("path has no contact segment")
    if surface is None:
        if cloud is None:
            raise InvalidParameter("need a surface model or a cloud to build one")
        surface = SurfaceModel(cloud)
    frame = surface.frame

    ts, targets, kinds, quats = _schedule(path, plant)
    n = len(ts)
    rng = np.random.default_rng(seed)
    noise = (rng.normal(0.0, plant.sensor_noise_sigma, size=(n, 3))
             if plant.sensor_noise_sigma > 0 else np.zeros((n, 3)))
    vib = plant.vibration
    vib_on = vib.amplitude != 0.0 and vib.frequency != 0.0

    traj_pos = np.empty((n, 3))
    traj_wrench = np.zeros((n, 6))
    traj_error = np.zeros((n, 6))
    traj_upose = np.zeros((n, 3))
    traj_uwrench = np.zeros((n, 6))

    state = PidState()
    offset_world = np.zeros(3)
    u_held = np.zeros(6)
    delta_prev = 0.0
    prev_pos = targets[0]
    success = True
    reason = None
    last = n

    for j in range(n):
        base = targets[j]
        rot = quaternion_to_matrix(quats[j])
        pos_meas = base + offset_world
        local = frame.to_local(pos_meas)[0]
        height, inside = surface.height(local[0], local[1])
        if vib_on:
            height += vib.amplitude * np.sin(2.0 * np.pi * vib.frequency * ts[j])
        delta = max(0.0, height - local[2]) if inside else 0.0
        rate = (delta - delta_prev) / plant.timestep if j > 0 else 0.0
        force = contact_force(delta, rate, plant)
        delta_prev = delta

        measured = np.zeros(6)
        measured[2] = force
        measured[:3] += noise[j]
        err = wrench_region_error(measured, region)

        if kinds[j] == "contact":
            u, state = pid_step(state, err, plant.timestep, gains)
            u_held = u
            # Velocity-form admittance: the offset accumulates per step,
            # bounded by the actuator travel limit.
            offset_world = offset_world + rot @ (plant.admittance * u[:3])
            offset_world = np.clip(offset_world, -plant.offset_limit, plant.offset_limit)
        # Non-contact samples hold the accumulated correction; the PID
        # state is frozen so free-space error cannot wind up the integral.

        traj_pos[j] = base + offset_world
        traj_wrench[j] = measured
        traj_error[j] = err
        traj_upose[j] = base - prev_pos
        traj_uwrench[j] = u_held if kinds[j] == "contact" else 0.0
        prev_pos = traj_pos[j]

        if np.any(np.abs(measured[:3]) > plant.force_limit):
            success = False
            reason = "ForceLimitExceeded"
            last = j + 1
            break

    traj = Trajectory(t=ts[:last], position=traj_pos[:last], quaternion=quats[:last],
                      wrench=traj_wrench[:last], error=traj_error[:last],
                      u_pose=traj_upose[:last], u_wrench=traj_uwrench[:last],
                      kind=list(kinds[:last]), dt=plant.timestep, seed=seed,
                      success=success, failure_reason=reason)
    return traj, control_metrics(traj, region)


def control_metrics(traj: Trajectory, region: WrenchRegion) -> ControlMetrics:
    """Force-tracking metrics along z against the region's z setpoint.

    Rise time is the first instant the measured F_z reaches 90% of the
    setpoint; MAE is averaged over contact samples after the rise; MAX is
    taken after the setpoint itself has first been reached.
    """
    if len(traj) == 0:
        raise EmptyTrajectory("no samples")
    setpoint = region.setpoint_z
    fz = traj.wrench[:, 2]
    contact = np.asarray([k == "contact" for k in traj.kind])
    n_contact = int(contact.sum())

    rise_idx = None
    risen = np.flatnonzero(contact & (fz >= 0.9 * setpoint))
    if len(risen):
        rise_idx = int(risen[0])
    mae = None
    max_after = None
    if rise_idx is not None:
        after = contact.copy()
        after[:rise_idx] = False
        if after.any():
            mae = float(np.mean(np.abs(fz[after] - setpoint)))
        reached = np.flatnonzero(contact & (fz >= setpoint))
        if len(reached):
            from_reach = contact.copy()
            from_reach[:int(reached[0])] = False
            max_after = float(np.max(np.abs(fz[from_reach] - setpoint)))
    return ControlMetrics(mae=mae, max_after_rise=max_after,
                          rise_time=None if rise_idx is None else float(traj.t[rise_idx]),
                          success=traj.success, failure_reason=traj.failure_reason,
                          setpoint=setpoint, n_contact_samples=n_contact)


def tune_gains_default(plant: PlantConfig, region: WrenchRegion | None = None) -> PidGains:
    """Plant-normalized default gains for the admittance force loop.

    The dimensionless loop shape (kp_hat + ki_hat/s) is divided by the
    plant's static loop gain k_c * admittance, so doubling the stiffness
    halves every gain. kp_hat sets the crossover (capped by the one-step
    transport delay); ki_hat buys mid-band disturbance rejection.
    """
    loop_gain = plant.contact_stiffness * plant.admittance
    kp_hat, ki_hat, kd_hat = 0.7, 120.0, 0.0
    # Only the contact-constrained z axis is force-controlled; the free
    # axes have no plant feedback, where integral action would random-walk
    # on sensor noise. Position control owns them (hybrid split).
    z = (np.arange(6) == 2).astype(float)
    kp = z * kp_hat / loop_gain
    ki = z * ki_hat / loop_gain
    kd = z * kd_hat / loop_gain
    # ~2/3 N·s of windup: a tenth of a second of a 5 N error.
    clamp = np.full(6, 0.667)
    return PidGains(kp, ki, kd, derivative_beta=0.9, integral_clamp=clamp)
