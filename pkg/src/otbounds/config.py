"""Experiment configuration: a versioned JSON document validated into dataclasses."""
import json
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

from .errors import ConfigError
from .hypotheses import SYSTEMS
from .potentials import FAMILIES, DensityPair, Potential
from .sampling import AsymptoticSample, GridSpec

SCHEMA = 1
SOLVERS = ("oracle-1d", "oracle-radial", "entropic")


@dataclass(frozen=True)
class HypothesisOptions:
    p: Optional[float] = None
    q: Optional[float] = None
    r0: Optional[float] = None
    r0_asym: Optional[float] = None
    radius: Optional[float] = None


@dataclass(frozen=True)
class ProfileOptions:
    horizon: float = 1e3
    n_nodes: int = 512
    tol: float = 1e-12


@dataclass(frozen=True)
class EntropicOptions:
    half_width: float = 20.0
    n: int = 256
    tol: float = 1e-7
    max_iter: int = 20000
    steps_per_decade: int = 4


@dataclass(frozen=True)
class VerificationOptions:
    r_min: float = 1e-2
    r_max: Optional[float] = None          # default: the map's range
    n_radii: int = 100
    n_directions: int = 16
    eps_list: tuple = (1.0, 0.1, 0.01)


@dataclass(frozen=True)
class ExperimentConfig:
    run_id: str
    pair: dict
    theorem: str
    solver: str
    normalize: bool = True
    slack: float = 0.02
    out_dir: str = "runs"
    hypotheses: HypothesisOptions = field(default_factory=HypothesisOptions)
    grid: GridSpec = field(default_factory=GridSpec)
    asymptotic: AsymptoticSample = field(default_factory=AsymptoticSample)
    profile: ProfileOptions = field(default_factory=ProfileOptions)
    entropic: EntropicOptions = field(default_factory=EntropicOptions)
    verification: VerificationOptions = field(default_factory=VerificationOptions)
    schema: int = SCHEMA

    def density_pair(self):
        pair = DensityPair.from_dict(self.pair)
        if self.normalize:
            from .potentials import normalize
            pair = normalize(pair, self.profile.tol * 100)
        return pair

    def to_dict(self):
        out = asdict(self)
        out["verification"]["eps_list"] = list(self.verification.eps_list)
        return out


_SECTIONS = {"hypotheses": HypothesisOptions, "grid": GridSpec, "asymptotic": AsymptoticSample,
             "profile": ProfileOptions, "entropic": EntropicOptions,
             "verification": VerificationOptions}


def _section(name, cls, data):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(name, "must be an object")
    known = {f.name for f in fields(cls)}
    for k in data:
        if k not in known:
            raise ConfigError(f"{name}.{k}", "unknown field")
    kw = dict(data)
    if "eps_list" in kw:
        kw["eps_list"] = tuple(float(e) for e in kw["eps_list"])
    try:
        return cls(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(name, str(exc)) from None


def _check_potential(path, spec, d):
    if not isinstance(spec, dict):
        raise ConfigError(path, "must be an object")
    fam = spec.get("family")
    if fam not in FAMILIES:
        raise ConfigError(f"{path}.family", f"must be one of {FAMILIES}")
    if "dimension" in spec and spec["dimension"] != d:
        raise ConfigError(f"{path}.dimension", "differs from pair.dimension")
    for key in ("coefficient", "scale"):
        if key in spec and spec[key] is not None and not spec[key] > 0:
            raise ConfigError(f"{path}.{key}", "must be positive")
    if fam in ("power", "scaled-power") and "exponent" in spec and not spec["exponent"] > 1:
        raise ConfigError(f"{path}.exponent", "must exceed 1 for an integrable power family")
    try:
        Potential.from_dict({**spec, "dimension": d})
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from None


def config_from_dict(data):
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    if data.get("schema", SCHEMA) != SCHEMA:
        raise ConfigError("schema", f"unsupported schema {data.get('schema')!r}")
    for key in ("run_id", "pair", "theorem", "solver"):
        if key not in data:
            raise ConfigError(key, "missing")
    allowed = {f.name for f in fields(ExperimentConfig)}
    for k in data:
        if k not in allowed:
            raise ConfigError(k, "unknown field")
    pair = data["pair"]
    if not isinstance(pair, dict) or "source" not in pair or "target" not in pair:
        raise ConfigError("pair", "needs source and target")
    d = pair.get("dimension")
    if not isinstance(d, int) or d < 1:
        raise ConfigError("pair.dimension", "must be a positive integer")
    _check_potential("pair.source", pair["source"], d)
    _check_potential("pair.target", pair["target"], d)
    theorem, solver = data["theorem"], data["solver"]
    if theorem not in SYSTEMS:
        raise ConfigError("theorem", f"must be one of {SYSTEMS}")
    if solver not in SOLVERS:
        raise ConfigError("solver", f"must be one of {SOLVERS}")
    src_fam, tgt_fam = pair["source"]["family"], pair["target"]["family"]
    if theorem == "thm-2.3" and tgt_fam != "gaussian-exp":
        raise ConfigError("theorem", "thm-2.3 needs a gaussian-exp target")
    if solver == "oracle-1d" and d != 1:
        raise ConfigError("solver", "oracle-1d needs dimension 1")
    if solver == "oracle-radial" and "custom-composite" in (src_fam, tgt_fam):
        raise ConfigError("solver", "oracle-radial needs radial source and target families")
    if solver == "entropic" and d not in (1, 2):
        raise ConfigError("solver", "entropic solver supports dimension 1 or 2")
    slack = data.get("slack", 0.02)
    if not isinstance(slack, (int, float)) or slack < 0:
        raise ConfigError("slack", "must be a nonnegative number")
    kw = {k: data[k] for k in ("run_id", "pair", "theorem", "solver", "normalize", "slack", "out_dir",
                               "schema") if k in data}
    for name, cls in _SECTIONS.items():
        kw[name] = _section(name, cls, data.get(name))
    cfg = ExperimentConfig(**kw)
    ver = cfg.verification
    if solver == "entropic" and ver.r_max is not None and ver.r_max > cfg.entropic.half_width / 2:
        raise ConfigError("verification.r_max", "grid maps are verified only on |x| <= L/2")
    if ver.r_max is not None and solver != "entropic" and ver.r_max > cfg.profile.horizon:
        raise ConfigError("verification.r_max", "exceeds profile.horizon")
    return cfg


def load_config(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from None
    return config_from_dict(data)
