"""Experiment configuration: JSON schema, canonical serialization, hashing.

Configs round-trip bit-exactly through their canonical JSON form (sorted keys,
two-space indent, shortest round-trip floats).  The summability index r may be
the string "inf"; plain JSON numbers cover everything else.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources

import jsonschema

from .dynamics import SolverConfig
from .fourier import CircleFunction, from_modes_dict, random_rough, random_smooth, to_modes_dict


class ConfigError(ValueError):
    """Configuration file failed to parse or validate."""


class PreconditionError(RuntimeError):
    """A documented precondition gate failed (exit code 3)."""


@dataclass(frozen=True)
class InitialData:
    kind: str                           # "random_rough" | "random_smooth" | "inline"
    s: float | None = None
    seed: int | None = None
    band: int | None = None
    amplitude: float = 1.0
    decay: float | None = None          # modulus law override, smooth profile only
    hs_target: float | None = None      # rescale so hs_norm at the resolved kappa hits this
    modes: dict | None = None           # inline coefficient object

    def build(self, seed_override: int | None = None) -> CircleFunction:
        seed = self.seed if seed_override is None else seed_override
        if self.kind == "random_rough":
            return random_rough(self.s, seed, self.band, self.amplitude)
        if self.kind == "random_smooth":
            return random_smooth(seed, self.band, self.amplitude,
                                 self.decay if self.decay is not None else 4.0)
        if self.kind == "inline":
            return from_modes_dict(self.modes)
        raise ConfigError(f"unknown initial data kind {self.kind!r}")


@dataclass(frozen=True)
class KappaPolicy:
    kind: str                           # "fixed" | "threshold"
    kappa: float | None = None
    s: float | None = None
    margin: float | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    initial_data: InitialData
    solver: SolverConfig
    kappa_policy: KappaPolicy
    norms_to_track: list
    output_dir: str

    def to_json_obj(self) -> dict:
        init = {"kind": self.initial_data.kind}
        for name in ("s", "seed", "band", "amplitude", "decay", "hs_target", "modes"):
            v = getattr(self.initial_data, name)
            if v is not None and not (name == "amplitude" and v == 1.0 and
                                      self.initial_data.kind == "inline"):
                init[name] = v
        pol = {"kind": self.kappa_policy.kind}
        for name in ("kappa", "s", "margin"):
            v = getattr(self.kappa_policy, name)
            if v is not None:
                pol[name] = v
        return {
            "initial_data": init,
            "solver": {
                "band_limit": self.solver.band_limit,
                "dt": self.solver.dt,
                "final_time": self.solver.final_time,
                "integrator": self.solver.integrator,
                "dealias": self.solver.dealias,
                "snapshot_every": self.solver.snapshot_every,
            },
            "kappa_policy": pol,
            "norms_to_track": [
                {"s": s, "r": ("inf" if math.isinf(r) else r)}
                for (s, r) in self.norms_to_track
            ],
            "output_dir": self.output_dir,
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, indent=2)

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]


def _schema(name: str) -> dict:
    text = resources.files("boconserve.schemas").joinpath(name).read_text()
    return json.loads(text)


def validate_summary(obj: dict) -> None:
    jsonschema.validate(obj, _schema("summary.schema.json"))


def config_from_obj(obj: dict) -> ExperimentConfig:
    try:
        jsonschema.validate(obj, _schema("config.schema.json"))
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise ConfigError(f"config field {path or '<root>'}: {exc.message}") from exc
    init = obj["initial_data"]
    solver = obj["solver"]
    pol = obj["kappa_policy"]
    norms = []
    for entry in obj.get("norms_to_track", []):
        r = entry["r"]
        norms.append((float(entry["s"]), math.inf if r == "inf" else float(r)))
    try:
        cfg = ExperimentConfig(
            initial_data=InitialData(
                kind=init["kind"],
                s=init.get("s"),
                seed=init.get("seed"),
                band=init.get("band"),
                amplitude=init.get("amplitude", 1.0),
                decay=init.get("decay"),
                hs_target=init.get("hs_target"),
                modes=init.get("modes"),
            ),
            solver=SolverConfig(
                band_limit=int(solver["band_limit"]),
                dt=float(solver["dt"]),
                final_time=float(solver["final_time"]),
                integrator=solver.get("integrator", "etdrk4"),
                dealias=bool(solver.get("dealias", True)),
                snapshot_every=int(solver.get("snapshot_every", 100)),
            ),
            kappa_policy=KappaPolicy(
                kind=pol["kind"],
                kappa=pol.get("kappa"),
                s=pol.get("s"),
                margin=pol.get("margin"),
            ),
            norms_to_track=norms,
            output_dir=obj.get("output_dir", "out"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.kappa_policy.kind == "fixed" and cfg.kappa_policy.kappa is None:
        raise ConfigError("fixed kappa policy requires a kappa value")
    if cfg.kappa_policy.kind == "threshold" and (cfg.kappa_policy.s is None or
                                                 cfg.kappa_policy.margin is None):
        raise ConfigError("threshold kappa policy requires s and margin")
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: line {exc.lineno}: {exc.msg}") from exc
    return config_from_obj(obj)


def save_config(cfg: ExperimentConfig, path) -> None:
    with open(path, "w") as fh:
        fh.write(cfg.canonical_json())
        fh.write("\n")
