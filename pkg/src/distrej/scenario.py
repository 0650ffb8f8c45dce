"""Declarative closed-loop scenarios: configuration, runner, traces and reports.

A scenario file (YAML) fixes the arm, the task, the controller and every
disturbance and noise source. ``run_scenario`` executes the loop

    sense -> estimate -> control -> actuate -> integrate plant

once per control period and returns the full trace plus an RMSE report.
Runs are deterministic for a fixed seed.
"""

from __future__ import annotations

import copy
import csv
import io
import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .baseline import DEFAULT_GAIN, init_observer, observer_step
from .control import DEFAULT_KD, DEFAULT_KP, ControlGains, Reference, control_no_comp, control_with_comp
from .dynamics import ArmModel, load_arm
from .errors import (
    ComparisonError,
    ConfigurationError,
    DivergenceError,
    InvalidStateError,
    MeasurementError,
    SingularDynamicsError,
    TraceFileError,
)
from .estimator import DisturbanceEstimator
from .filters import FilterParams
from .plant import (
    Actuator,
    FrictionModel,
    InjectedDisturbance,
    PayloadEvent,
    SensorModel,
    actuate,
    init_plant_state,
    plant_step,
    sense,
)

SCENARIO_SCHEMA_VERSION = 1
TASKS = ("hold", "goto", "sine")
CONTROLLERS = ("no_comp", "with_comp")
VELOCITY_SOURCES = ("measured", "estimate")
DIVERGENCE_LIMIT = 1e3
OUTPUT_DIR_ENV = "DISTREJ_OUTPUT_DIR"
BUNDLED_SCENARIOS = Path(__file__).parent / "data" / "scenarios"
BUNDLED_ARMS = Path(__file__).parent / "data" / "arms"


# ------------------------------------------------------------------ config


@dataclass(frozen=True, eq=False)
class Task:
    kind: str
    q0: np.ndarray
    increment: np.ndarray | None = None
    start_time: float = 0.0
    amplitude: np.ndarray | None = None
    frequency: float = 0.0
    phase: float = 0.0


@dataclass(eq=False)
class ScenarioConfig:
    name: str
    arm_file: Path
    task: Task
    controller: str = "with_comp"
    control_velocity: str = "measured"
    dt: float = 1e-3
    duration: float = 10.0
    seed: int = 0
    filter_params: FilterParams = field(default_factory=FilterParams)
    baseline_enabled: bool = False
    baseline_gain: np.ndarray | float = DEFAULT_GAIN
    gains: ControlGains | None = None
    friction: FrictionModel | None = None
    payloads: tuple[PayloadEvent, ...] = ()
    sensor: SensorModel = field(default_factory=SensorModel)
    disturbance: InjectedDisturbance | None = None
    model_error: float = 0.0
    actuator: Actuator = field(default_factory=Actuator)
    plant_substeps: int = 1
    score_from: float | None = None
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    @property
    def window_start(self) -> float:
        if self.score_from is not None:
            return self.score_from
        return self.task.start_time if self.task.kind == "goto" else 0.0

    def with_overrides(self, **dotted) -> "ScenarioConfig":
        """New config with dotted-path overrides applied to the file-level mapping.

        >>> cfg.with_overrides(**{"sensor.sigma_qd": 0.1, "controller": "no_comp"})
        """
        data = copy.deepcopy(self.raw)
        for path, value in dotted.items():
            set_dotted(data, path, value)
        return config_from_dict(data, base_dir=self.arm_file.parent, name=self.name)


def set_dotted(data: dict, path: str, value) -> None:
    keys = path.split(".")
    node = data
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigurationError(f"cannot set {path!r}: {key!r} is not a mapping")
    node[keys[-1]] = value


def _vector(value, n, name, default=None):
    if value is None:
        if default is None:
            raise ConfigurationError(f"{name} is required")
        value = default
    arr = np.array(value, dtype=float).reshape(-1)
    if arr.size == 1:
        arr = np.full(n, arr[0])
    if arr.shape != (n,) or not np.all(np.isfinite(arr)):
        raise ConfigurationError(f"{name} must be a finite scalar or {n}-vector")
    return arr


def _resolve_arm(arm_file, base_dir: Path) -> Path:
    candidate = Path(arm_file)
    if not candidate.is_absolute():
        for root in (base_dir, BUNDLED_ARMS):
            if (root / candidate).is_file():
                return (root / candidate).resolve()
    if candidate.is_file():
        return candidate.resolve()
    raise ConfigurationError(f"arm file not found: {arm_file}")


def config_from_dict(data: dict, base_dir=".", name: str | None = None) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigurationError("scenario must be a mapping")
    version = data.get("schema_version")
    if version != SCENARIO_SCHEMA_VERSION:
        raise ConfigurationError(f"unsupported or missing scenario schema_version: {version!r}")
    raw = copy.deepcopy(data)
    arm_path = _resolve_arm(data.get("arm_file", ""), Path(base_dir))
    arm = load_arm(arm_path)
    n = arm.n_dof

    task_data = data.get("task") or {}
    kind = task_data.get("type", "hold")
    if kind not in TASKS:
        raise ConfigurationError(f"unknown task {kind!r}; expected one of {TASKS}")
    q0 = _vector(data.get("initial_q"), n, "initial_q", default=0.0)
    task = Task(
        kind=kind,
        q0=q0,
        increment=_vector(task_data.get("increment"), n, "task.increment", 0.0) if kind == "goto" else None,
        start_time=float(task_data.get("start_time", 0.0)),
        amplitude=_vector(task_data.get("amplitude"), n, "task.amplitude", 0.15) if kind == "sine" else None,
        frequency=float(task_data.get("frequency", 0.2 if kind == "sine" else 0.0)),
        phase=float(task_data.get("phase", 0.0)),
    )

    controller = data.get("controller", "with_comp")
    if controller not in CONTROLLERS:
        raise ConfigurationError(f"unknown controller {controller!r}; expected one of {CONTROLLERS}")
    velocity = data.get("control_velocity", "measured")
    if velocity not in VELOCITY_SOURCES:
        raise ConfigurationError(f"control_velocity must be one of {VELOCITY_SOURCES}")

    est = data.get("estimator") or {}
    gains = data.get("gains") or {}
    fr = data.get("friction") or {}
    sensor = data.get("sensor") or {}
    dist = data.get("disturbance")
    act = data.get("actuator") or {}
    base = data.get("baseline") or {}
    seed = int(data.get("seed", 0))

    payloads = []
    for ev in data.get("payloads") or []:
        try:
            payloads.append(PayloadEvent(
                t_drop=float(ev["t_drop"]),
                t_remove=float(ev["t_remove"]),
                mass=float(ev.get("mass", 0.0)),
                attach_link=int(ev.get("attach_link", n - 1)),
                impulse=None if ev.get("impulse") is None else _vector(ev["impulse"], n, "payload impulse"),
                drop_speed=float(ev.get("drop_speed", 0.0)),
                attach_point=ev.get("attach_point"),
            ))
        except KeyError as exc:
            raise ConfigurationError(f"payload event missing {exc}") from exc
        if not 0 <= payloads[-1].attach_link < n:
            raise ConfigurationError("payload attach_link out of range")

    cfg = ScenarioConfig(
        name=str(name or data.get("name", "scenario")),
        arm_file=arm_path,
        task=task,
        controller=controller,
        control_velocity=velocity,
        dt=float(data.get("dt", 1e-3)),
        duration=float(data.get("duration", 10.0)),
        seed=seed,
        filter_params=FilterParams(est.get("zeta", 0.8), est.get("omega1", 50.0), est.get("omega2", 50.0)),
        baseline_enabled=bool(base.get("enabled", False)),
        baseline_gain=_vector(base.get("gain"), n, "baseline.gain", DEFAULT_GAIN),
        gains=ControlGains(_vector(gains.get("kp"), n, "gains.kp", DEFAULT_KP),
                           _vector(gains.get("kd"), n, "gains.kd", DEFAULT_KD)),
        friction=FrictionModel(_vector(fr.get("coulomb"), n, "friction.coulomb", 0.0),
                               _vector(fr.get("viscous"), n, "friction.viscous", 0.0),
                               float(fr.get("stiction_velocity", 0.01)),
                               bool(fr.get("position_dependent", False))),
        payloads=tuple(payloads),
        sensor=SensorModel(float(sensor.get("sigma_q", 0.0)), float(sensor.get("sigma_qd", 0.0)),
                           float(sensor.get("sigma_tau", 0.0)), seed),
        disturbance=None if not dist else InjectedDisturbance(
            _vector(dist.get("bias"), n, "disturbance.bias", 0.0),
            _vector(dist.get("amplitude"), n, "disturbance.amplitude", 0.0),
            _vector(dist.get("frequency"), n, "disturbance.frequency", 0.0),
            _vector(dist.get("phase"), n, "disturbance.phase", 0.0)),
        model_error=float(data.get("model_error", 0.0)),
        actuator=Actuator(
            None if act.get("time_constant") is None else _vector(act["time_constant"], n, "actuator.time_constant"),
            None if act.get("torque_limit") is None else _vector(act["torque_limit"], n, "actuator.torque_limit")),
        plant_substeps=int(data.get("plant_substeps", 1)),
        score_from=None if data.get("score_from") is None else float(data["score_from"]),
        raw=raw,
    )
    if not cfg.duration > 0:
        raise ConfigurationError("duration must be > 0")
    if not cfg.dt > 0:
        raise ConfigurationError("dt must be > 0")
    if cfg.plant_substeps < 1:
        raise ConfigurationError("plant_substeps must be >= 1")
    return cfg


def load_scenario(path) -> ScenarioConfig:
    path = Path(path)
    if not path.is_file():
        bundled = BUNDLED_SCENARIOS / path.name
        if not bundled.is_file():
            bundled = BUNDLED_SCENARIOS / f"{path.name}.yaml"
        if not bundled.is_file():
            raise ConfigurationError(f"scenario file not found: {path}")
        path = bundled
    with open(path) as fh:
        data = yaml.safe_load(fh)
    name = data.get("name") if isinstance(data, dict) else None
    return config_from_dict(data, base_dir=path.parent, name=name or path.stem)


def bundled_scenarios() -> list[Path]:
    return sorted(BUNDLED_SCENARIOS.glob("*.yaml"))


# --------------------------------------------------------------- reference


def make_reference(task: Task, t: float) -> Reference:
    if task.kind == "hold":
        z = np.zeros_like(task.q0)
        return Reference(task.q0.copy(), z, z.copy())
    if task.kind == "goto":
        z = np.zeros_like(task.q0)
        q = task.q0 + task.increment if t >= task.start_time else task.q0.copy()
        return Reference(q, z, z.copy())
    if task.kind == "sine":
        w = 2.0 * math.pi * task.frequency
        arg = w * t + task.phase
        a = task.amplitude
        return Reference(task.q0 + a * math.sin(arg), a * w * math.cos(arg), -a * w * w * math.sin(arg))
    raise ConfigurationError(f"unknown task {task.kind!r}")


# ----------------------------------------------------------- trace/report


TRACE_GROUPS = ("q_true", "q_des", "q_m", "tau_cmd", "d_true", "d_hat", "d_hat_baseline", "e")


@dataclass(eq=False)
class SimTrace:
    time: np.ndarray
    q_true: np.ndarray
    qd_true: np.ndarray | None
    q_des: np.ndarray
    q_m: np.ndarray
    tau_cmd: np.ndarray
    d_true: np.ndarray
    d_hat: np.ndarray
    d_hat_baseline: np.ndarray | None
    e: np.ndarray

    @property
    def n(self) -> int:
        return self.q_true.shape[1]

    def __len__(self) -> int:
        return self.time.shape[0]

    def window(self, t0: float, t1: float = math.inf) -> np.ndarray:
        """Boolean mask of samples with t0 <= time < t1."""
        return (self.time >= t0 - 1e-12) & (self.time < t1 - 1e-12)

    def header(self) -> list[str]:
        cols = ["time"]
        for group in TRACE_GROUPS:
            if group == "d_hat_baseline" and self.d_hat_baseline is None:
                continue
            cols += [f"{group}_{j + 1}" for j in range(self.n)]
        return cols

    def matrix(self) -> np.ndarray:
        blocks = [self.time[:, None]]
        for group in TRACE_GROUPS:
            arr = getattr(self, group)
            if arr is not None:
                blocks.append(arr)
        return np.hstack(blocks)


def empty_trace(n: int, baseline: bool = False) -> SimTrace:
    z = np.zeros((0, n))
    return SimTrace(np.zeros(0), z, z.copy(), z.copy(), z.copy(), z.copy(), z.copy(), z.copy(),
                    z.copy() if baseline else None, z.copy())


def rms(x, axis=0) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[axis] == 0:
        return np.zeros(x.shape[1 - axis]) if x.ndim == 2 else np.float64(0.0)
    return np.sqrt(np.mean(x * x, axis=axis))


@dataclass
class RmseReport:
    scenario: str
    controller: str
    window_start: float
    rmse_e: list[float]
    rms_d_err: list[float]
    rms_d_err_baseline: list[float] | None = None
    seed: int = 0

    @property
    def n(self) -> int:
        return len(self.rmse_e)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "controller": self.controller,
            "seed": self.seed,
            "window_start": self.window_start,
            "rmse_e": list(self.rmse_e),
            "rms_d_err": list(self.rms_d_err),
            "rms_d_err_baseline": None if self.rms_d_err_baseline is None else list(self.rms_d_err_baseline),
            "units": {"rmse_e": "rad", "rms_d_err": "N m"},
            "notes": "rmse_e over [window_start, end]; d errors scored against the simulator's true disturbance",
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "RmseReport":
        try:
            return cls(
                scenario=data["scenario"],
                controller=data["controller"],
                window_start=float(data["window_start"]),
                rmse_e=[float(v) for v in data["rmse_e"]],
                rms_d_err=[float(v) for v in data["rms_d_err"]],
                rms_d_err_baseline=None if data.get("rms_d_err_baseline") is None
                else [float(v) for v in data["rms_d_err_baseline"]],
                seed=int(data.get("seed", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"malformed report: {exc}") from exc


def make_report(trace: SimTrace, cfg: ScenarioConfig) -> RmseReport:
    mask = trace.window(cfg.window_start)
    return RmseReport(
        scenario=cfg.name,
        controller=cfg.controller,
        window_start=cfg.window_start,
        rmse_e=rms(trace.e[mask]).tolist(),
        rms_d_err=rms(trace.d_hat[mask] - trace.d_true[mask]).tolist(),
        rms_d_err_baseline=None if trace.d_hat_baseline is None
        else rms(trace.d_hat_baseline[mask] - trace.d_true[mask]).tolist(),
        seed=cfg.seed,
    )


# ------------------------------------------------------------------ runner


def build_models(cfg: ScenarioConfig) -> tuple[ArmModel, ArmModel]:
    """(nominal controller model, plant model)."""
    nominal = load_arm(cfg.arm_file)
    plant = nominal.scaled(cfg.model_error) if cfg.model_error else nominal
    return nominal, plant


PREROLL_TIME_CONSTANTS = 25.0


def _torque_rates(model: ArmModel, task: Task, t: float, h: float = 1e-4):
    """First and second time derivatives at ``t`` of the nominal torque along the reference."""
    if task.kind != "sine":
        z = np.zeros_like(task.q0)
        return z, z.copy()
    tau = [model.chain.rnea(r.q_des, r.qd_des, r.qdd_des)
           for r in (make_reference(task, t + dk) for dk in (-h, 0.0, h))]
    return (tau[2] - tau[0]) / (2 * h), (tau[2] - 2 * tau[1] + tau[0]) / (h * h)


def _slowest_rate(params: FilterParams) -> float:
    w1, w2, zeta = params.omega1, params.omega2, params.zeta
    poles = np.roots([1.0, 2.0 * zeta * w2 + w1, w2 * w2 + 2.0 * zeta * w2 * w1, w1 * w2 * w2])
    return float(np.min(-poles.real))


def primed_estimator(model: ArmModel, cfg: ScenarioConfig) -> DisturbanceEstimator:
    """Estimator whose banks have been tracking the reference before t = 0.

    The banks start from their steady state for the reference's derivatives
    and then run over a noiseless pre-roll of the reference and its nominal
    torque, long enough for any residual start-up transient to decay below
    1e-10. A run therefore begins without a filter transient; the pre-roll
    reads no measurements.
    """
    dt = cfg.dt
    n_pre = int(math.ceil(PREROLL_TIME_CONSTANTS / _slowest_rate(cfg.filter_params) / dt))
    t0 = -n_pre * dt
    ref = make_reference(cfg.task, t0)
    est = DisturbanceEstimator(model, cfg.filter_params, ref.q_des,
                               model.chain.rnea(ref.q_des, ref.qd_des, ref.qdd_des), dt,
                               q_rates=(ref.qd_des, ref.qdd_des), tau_rates=_torque_rates(model, cfg.task, t0))
    for k in range(n_pre):
        ref = make_reference(cfg.task, t0 + k * dt)
        est.step(ref.q_des, model.chain.rnea(ref.q_des, ref.qd_des, ref.qdd_des))
    return est


def run_scenario(cfg: ScenarioConfig) -> tuple[SimTrace, RmseReport]:
    nominal, plant = build_models(cfg)
    n = nominal.n_dof
    dt = cfg.dt
    steps = cfg.n_steps
    friction = cfg.friction or FrictionModel.none(n)
    dist = cfg.disturbance or InjectedDisturbance.none(n)
    gains = cfg.gains or ControlGains.uniform(n)
    with_comp = cfg.controller == "with_comp"
    use_estimate_velocity = cfg.control_velocity == "estimate"

    rec = {g: np.empty((steps, n)) for g in TRACE_GROUPS if g != "d_hat_baseline"}
    rec["qd_true"] = np.empty((steps, n))
    baseline = np.empty((steps, n)) if cfg.baseline_enabled else None
    time = np.arange(steps) * dt

    # the arm starts on its reference (at rest for hold and goto), driven by
    # the nominal torque for that motion
    ref0 = make_reference(cfg.task, 0.0)
    state = init_plant_state(ref0.q_des, ref0.qd_des, n_events=len(cfg.payloads))
    tau_actual = nominal.chain.rnea(ref0.q_des, ref0.qd_des, ref0.qdd_des)
    estimator = primed_estimator(nominal, cfg)
    observer = None

    for k in range(steps):
        t = k * dt
        q_true = state.true_state.q
        qd_true = state.true_state.qd
        try:
            q_m, qd_m, tau_m = sense(state, cfg.sensor, tau_actual)
            est = estimator.step(q_m, tau_m)
            if baseline is not None:
                if observer is None:
                    observer = init_observer(nominal, cfg.baseline_gain, q_m, qd_m)
                observer, d_base = observer_step(nominal, observer, q_m, qd_m, tau_m, dt)
                baseline[k] = d_base
            ref = make_reference(cfg.task, t)
            qd_ctrl = est.qd_hat if use_estimate_velocity else qd_m
            if with_comp:
                tau_cmd = control_with_comp(nominal, q_m, qd_ctrl, ref, gains, est.d_hat)
            else:
                tau_cmd = control_no_comp(nominal, q_m, qd_ctrl, ref, gains)
            tau_actual = actuate(cfg.actuator, tau_actual, tau_cmd, dt)
            state = plant_step(plant, state, tau_actual, friction, cfg.payloads, dt,
                               nominal=nominal, disturbance=dist, substeps=cfg.plant_substeps)
        except (InvalidStateError, MeasurementError, SingularDynamicsError) as exc:
            # non-finite states or a broken-down mass matrix: the loop has blown up
            raise DivergenceError(k, f"simulation diverged at step {k} (t = {t:.3f} s): {exc}") from exc
        if not np.all(np.abs(state.true_state.q) <= DIVERGENCE_LIMIT):
            raise DivergenceError(k, f"simulation diverged at step {k} (t = {t:.3f} s)")

        rec["q_true"][k] = q_true
        rec["qd_true"][k] = qd_true
        rec["q_des"][k] = ref.q_des
        rec["q_m"][k] = q_m
        rec["tau_cmd"][k] = tau_cmd
        rec["d_true"][k] = state.last.d_true
        rec["d_hat"][k] = est.d_hat
        rec["e"][k] = q_true - ref.q_des

    trace = SimTrace(time=time, d_hat_baseline=baseline, **rec)
    return trace, make_report(trace, cfg)


def _run_for_pool(args):
    cfg = args
    return run_scenario(cfg)


def run_batch(configs, max_workers: int | None = None):
    """Run independent scenarios, in worker processes when ``max_workers`` > 1."""
    configs = list(configs)
    if not configs:
        return []
    if max_workers is None:
        max_workers = min(len(configs), os.cpu_count() or 1)
    if max_workers <= 1 or len(configs) == 1:
        return [run_scenario(c) for c in configs]
    with ProcessPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(_run_for_pool, configs))


# ------------------------------------------------------------------ export


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise TraceFileError(f"cannot write {path}: {exc}") from exc


def export_trace(trace: SimTrace, path) -> Path:
    """Write the trace as CSV, one row per step, floats in shortest round-trip form."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(trace.header())
    for row in trace.matrix().tolist():
        writer.writerow([repr(v) for v in row])
    _atomic_write(path, buf.getvalue())
    return Path(path)


def read_trace(path) -> SimTrace:
    """Parse a CSV written by ``export_trace`` (``qd_true`` is not exported and comes back as None)."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise TraceFileError(f"cannot read {path}: {exc}") from exc
    header = rows[0]
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(len(rows) - 1, len(header))
    n = sum(1 for h in header if h.startswith("q_true_"))
    cols = {h: i for i, h in enumerate(header)}

    def group(name):
        key = f"{name}_1"
        if key not in cols:
            return None
        start = cols[key]
        return data[:, start:start + n].copy()

    return SimTrace(time=data[:, 0].copy(), q_true=group("q_true"), qd_true=None, q_des=group("q_des"),
                    q_m=group("q_m"), tau_cmd=group("tau_cmd"), d_true=group("d_true"),
                    d_hat=group("d_hat"), d_hat_baseline=group("d_hat_baseline"), e=group("e"))


def export_report(report: RmseReport, path) -> Path:
    _atomic_write(path, report.to_json())
    return Path(path)


def load_report(path) -> RmseReport:
    try:
        with open(path) as fh:
            return RmseReport.from_dict(json.load(fh))
    except OSError as exc:
        raise TraceFileError(f"cannot read {path}: {exc}") from exc


# -------------------------------------------------------------- comparison


@dataclass
class ComparisonSummary:
    scenario: str
    controller_a: str
    controller_b: str
    rmse_a: list[float]
    rmse_b: list[float]
    ratio: list[float]
    winner: list[str]
    dominant: str | None

    @property
    def dominates(self) -> bool:
        return self.dominant is not None

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "a": self.controller_a,
            "b": self.controller_b,
            "joints": [
                {"joint": j + 1, "rmse_a": a, "rmse_b": b, "ratio_a_over_b": r, "winner": w}
                for j, (a, b, r, w) in enumerate(zip(self.rmse_a, self.rmse_b, self.ratio, self.winner))
            ],
            "dominant": self.dominant,
            "dominates": self.dominates,
        }

    def to_text(self) -> str:
        lines = [f"scenario: {self.scenario}   a = {self.controller_a}   b = {self.controller_b}",
                 f"{'joint':>5}  {'rmse a [rad]':>14}  {'rmse b [rad]':>14}  {'a/b':>8}  winner"]
        for j, (a, b, r, w) in enumerate(zip(self.rmse_a, self.rmse_b, self.ratio, self.winner)):
            lines.append(f"{j + 1:>5}  {a:>14.6g}  {b:>14.6g}  {r:>8.4f}  {w}")
        lines.append(f"dominates: {'true' if self.dominates else 'false'}"
                     + (f" ({self.dominant} better on every joint)" if self.dominant else ""))
        return "\n".join(lines) + "\n"


def compare_report(a: RmseReport, b: RmseReport) -> ComparisonSummary:
    """Per-joint RMSE ratio a/b and winner; ``dominant`` names the report that wins every joint."""
    if a.scenario != b.scenario:
        raise ComparisonError(f"different scenarios: {a.scenario!r} vs {b.scenario!r}")
    if a.n != b.n:
        raise ComparisonError(f"different joint counts: {a.n} vs {b.n}")
    name_a = a.controller
    name_b = b.controller if b.controller != a.controller else f"{b.controller} (b)"
    ratio, winner = [], []
    for ea, eb in zip(a.rmse_e, b.rmse_e):
        if ea == eb:
            ratio.append(1.0)
            winner.append("tie")
            continue
        ratio.append(ea / eb if eb != 0.0 else math.inf)
        winner.append(name_a if ea < eb else name_b)
    dominant = None
    if all(w == name_a for w in winner):
        dominant = name_a
    elif all(w == name_b for w in winner):
        dominant = name_b
    return ComparisonSummary(a.scenario, name_a, name_b, list(a.rmse_e), list(b.rmse_e), ratio, winner, dominant)


# ------------------------------------------------------------------- sweep


def sweep(cfg: ScenarioConfig, param: str, values, seeds=None, max_workers: int | None = 1) -> list[dict]:
    """Re-run ``cfg`` with ``param`` set to each value (and each seed); one summary row per run."""
    seeds = [cfg.seed] if seeds is None else list(seeds)
    configs, keys = [], []
    for value in values:
        for seed in seeds:
            configs.append(cfg.with_overrides(**{param: value, "seed": seed}))
            keys.append((value, seed))
    rows = []
    for (value, seed), (_, report) in zip(keys, run_batch(configs, max_workers)):
        row = {"param": param, "value": value, "seed": seed,
               "rmse_e_mean": float(np.mean(report.rmse_e)),
               "rms_d_err_mean": float(np.mean(report.rms_d_err))}
        for j, v in enumerate(report.rms_d_err):
            row[f"rms_d_err_{j + 1}"] = v
        if report.rms_d_err_baseline is not None:
            row["rms_d_err_baseline_mean"] = float(np.mean(report.rms_d_err_baseline))
            for j, v in enumerate(report.rms_d_err_baseline):
                row[f"rms_d_err_baseline_{j + 1}"] = v
        rows.append(row)
    return rows


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, "distrej-out"))
