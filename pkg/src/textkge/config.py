"""Model/training configuration and flat key=value config files."""

from dataclasses import dataclass, field, fields, asdict

ENCODERS = ("lookup", "cnn", "bilstm")
SCORERS = ("transe", "tucker")
OBJECTIVES = ("full-bce", "sampled-bce", "margin")


@dataclass
class ModelConfig:
    encoder: str = "cnn"
    scorer: str = "tucker"
    d_w: int = 32
    d_e: int = 32
    d_r: int = 32
    hidden_size: int = 32
    filter_widths: tuple[int, ...] = (1, 2, 3)
    channels: int = 32
    transe_norm: str = "l2"

    def validate(self):
        if self.encoder not in ENCODERS:
            raise ValueError(f"encoder must be one of {ENCODERS}, got {self.encoder!r}")
        if self.scorer not in SCORERS:
            raise ValueError(f"scorer must be one of {SCORERS}, got {self.scorer!r}")
        if self.transe_norm not in ("l1", "l2"):
            raise ValueError(f"transe_norm must be l1 or l2, got {self.transe_norm!r}")
        if self.scorer == "transe" and self.d_r != self.d_e:
            raise ValueError("transe requires d_r == d_e")
        if any(w < 1 for w in self.filter_widths):
            raise ValueError("filter widths must be >= 1")


@dataclass
class TrainConfig:
    objective: str = "sampled-bce"
    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 1e-3
    margin: float = 1.0
    seed: int = 0
    clamp: float = 1e-7
    optimizer: str = "adam"
    dev_eval: bool = False
    # full-bce encodes every entity per step; refuse beyond this many
    max_full_bce_entities: int = 50_000

    def validate(self):
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}, got {self.objective!r}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if not (0 < self.clamp < 0.5):
            raise ValueError("clamp must be in (0, 0.5)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"optimizer must be adam or sgd, got {self.optimizer!r}")


@dataclass
class RunConfig:
    """Everything a training run needs: data location plus model/train settings."""
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    data: str = ""
    format: str = "src-first"
    out: str = "runs/out"


def _coerce(value: str, target_type):
    if target_type is bool:
        if value.lower() in ("1", "true", "yes"):
            return True
        if value.lower() in ("0", "false", "no"):
            return False
        raise ValueError(f"expected boolean, got {value!r}")
    if target_type is int:
        return int(value)
    if target_type is float:
        return float(value)
    if target_type == tuple[int, ...]:
        return tuple(int(v) for v in value.split(","))
    return value


def parse_config(path) -> RunConfig:
    """Parse a flat ``key = value`` config file. Unknown keys are hard errors."""
    model_fields = {f.name: f for f in fields(ModelConfig)}
    train_fields = {f.name: f for f in fields(TrainConfig)}
    top_fields = {"data": str, "format": str, "out": str}
    cfg = RunConfig()
    valid = sorted(model_fields | train_fields | top_fields)
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_no}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key in model_fields:
                ftype = model_fields[key].type
                ftype = {"int": int, "float": float, "str": str,
                         "tuple[int, ...]": tuple[int, ...]}.get(ftype, ftype)
                setattr(cfg.model, key, _coerce(value, ftype))
            elif key in train_fields:
                ftype = train_fields[key].type
                ftype = {"int": int, "float": float, "str": str,
                         "bool": bool}.get(ftype, ftype)
                setattr(cfg.train, key, _coerce(value, ftype))
            elif key in top_fields:
                setattr(cfg, key, value)
            else:
                raise ValueError(
                    f"{path}:{line_no}: unknown config key {key!r}; "
                    f"valid keys: {', '.join(valid)}")
    cfg.model.validate()
    cfg.train.validate()
    return cfg


def config_to_dict(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    d["model"]["filter_widths"] = list(cfg.model.filter_widths)
    return d


def config_from_dict(d: dict) -> RunConfig:
    model = ModelConfig(**{**d["model"],
                           "filter_widths": tuple(d["model"]["filter_widths"])})
    train = TrainConfig(**d["train"])
    return RunConfig(model=model, train=train, data=d.get("data", ""),
                     format=d.get("format", "src-first"), out=d.get("out", ""))
