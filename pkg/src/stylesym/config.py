"""Run configuration: a flat TOML-subset file mapped onto RunConfig.

Accepted syntax (documented with the full schema in docs/formats.md):
``[section]`` headers, ``key = value`` lines, ``#`` comments, and
scalar values only — quoted strings, integers, floats, true/false.
Everything is validated up front so commands fail before any
computation starts.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

from .errors import ConfigError
from .texture import FALLBACK_SELECTION, VGG_SELECTION

RANDOM_FALLBACK = "random-fallback"

_ALGEBRAS = ("affine2d", "pixel-linear")
_KINDS = ("basic", "standard", "detailed")


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse the flat key-value format into a dict of dotted keys."""
    out = {}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise ConfigError(f"{source}:{lineno}: malformed section header")
            section = line[1:-1].strip()
            if not section:
                raise ConfigError(f"{source}:{lineno}: empty section name")
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, _, rest = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        value = _parse_value(rest.strip(), source, lineno)
        full = f"{section}.{key}" if section else key
        if full in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {full!r}")
        out[full] = value
    return out


def _parse_value(text: str, source: str, lineno: int):
    if not text:
        raise ConfigError(f"{source}:{lineno}: missing value")
    if text[0] in "\"'":
        quote = text[0]
        end = text.find(quote, 1)
        if end < 0:
            raise ConfigError(f"{source}:{lineno}: unterminated string")
        trailer = text[end + 1 :].strip()
        if trailer and not trailer.startswith("#"):
            raise ConfigError(f"{source}:{lineno}: trailing garbage after string")
        return text[1:end]
    text = text.split("#", 1)[0].strip()
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{source}:{lineno}: cannot parse value {text!r}") from None


@dataclass(frozen=True)
class RunConfig:
    """Validated settings for one reproducible run."""

    manifest: Path = Path("manifest.csv")
    workdir: Path = Path("work")
    seed: int = 0
    # per-artist classifier
    mlp_width: int = 384
    mlp_depth: int = 4
    mlp_epochs: int = 80
    mlp_batch_size: int = 16
    mlp_learning_rate: float = 1e-2
    mlp_weight_decay: float = 1e-5
    mlp_image_size: int = 48
    # symmetry extraction
    algebra: str = "affine2d"
    generator_count: int = 4
    # texture route
    texture_container: str = RANDOM_FALLBACK
    texture_layers: tuple = ()
    texture_image_size: int = 224
    # blending and reports
    lam: float = 0.5
    bootstrap_b: int = 200
    bootstrap_threshold: float = 0.95
    mantel_permutations: int = 1000
    ground_truth: str = "standard"
    flow_delta: float = 0.35

    def __post_init__(self):
        object.__setattr__(self, "manifest", Path(self.manifest))
        object.__setattr__(self, "workdir", Path(self.workdir))
        for name in (
            "seed", "mlp_width", "mlp_depth", "mlp_epochs", "mlp_batch_size",
            "mlp_image_size", "generator_count", "texture_image_size",
            "bootstrap_b", "mantel_permutations",
        ):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        for name in ("mlp_width", "mlp_epochs", "mlp_batch_size", "mlp_image_size",
                     "generator_count", "texture_image_size", "bootstrap_b",
                     "mantel_permutations"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.mlp_depth < 0:
            raise ConfigError(f"mlp_depth must be >= 0, got {self.mlp_depth}")
        if self.mlp_learning_rate <= 0:
            raise ConfigError("mlp_learning_rate must be > 0")
        if self.mlp_weight_decay < 0:
            raise ConfigError("mlp_weight_decay must be >= 0")
        if self.algebra not in _ALGEBRAS:
            raise ConfigError(
                f"algebra must be one of {_ALGEBRAS}, got {self.algebra!r}"
            )
        if not 0.0 <= float(self.lam) <= 1.0:
            raise ConfigError(f"lambda must lie in [0, 1], got {self.lam!r}")
        if not 0.0 <= float(self.bootstrap_threshold) <= 1.0:
            raise ConfigError("bootstrap threshold must lie in [0, 1]")
        if self.ground_truth not in _KINDS:
            raise ConfigError(
                f"ground_truth must be one of {_KINDS}, got {self.ground_truth!r}"
            )
        if float(self.flow_delta) <= 0:
            raise ConfigError(f"flow delta must be > 0, got {self.flow_delta!r}")
        layers = self.texture_layers
        if isinstance(layers, str):
            layers = tuple(s.strip() for s in layers.split(",") if s.strip())
        if not layers:
            layers = (
                FALLBACK_SELECTION
                if self.texture_container == RANDOM_FALLBACK
                else VGG_SELECTION
            )
        object.__setattr__(self, "texture_layers", tuple(layers))

    def validate_paths(self) -> None:
        """Fail fast on referenced files; called before any computation."""
        if not self.manifest.is_file():
            raise ConfigError(f"manifest not found: {self.manifest}")
        if self.texture_container != RANDOM_FALLBACK:
            p = Path(self.texture_container)
            if not (p.is_file() or p.is_dir()):
                raise ConfigError(f"texture container not found: {p}")


_KEY_MAP = {
    "run.manifest": "manifest",
    "run.workdir": "workdir",
    "run.seed": "seed",
    "mlp.width": "mlp_width",
    "mlp.depth": "mlp_depth",
    "mlp.epochs": "mlp_epochs",
    "mlp.batch_size": "mlp_batch_size",
    "mlp.learning_rate": "mlp_learning_rate",
    "mlp.weight_decay": "mlp_weight_decay",
    "mlp.image_size": "mlp_image_size",
    "algebra.mode": "algebra",
    "algebra.generators": "generator_count",
    "texture.container": "texture_container",
    "texture.layers": "texture_layers",
    "texture.image_size": "texture_image_size",
    "distance.lambda": "lam",
    "bootstrap.b": "bootstrap_b",
    "bootstrap.threshold": "bootstrap_threshold",
    "mantel.permutations": "mantel_permutations",
    "mantel.ground_truth": "ground_truth",
    "flow.delta": "flow_delta",
}


def config_from_mapping(mapping: dict, base_dir=None) -> RunConfig:
    """Build a RunConfig from dotted keys; relative paths follow base_dir."""
    kwargs = {}
    for key, value in mapping.items():
        try:
            kwargs[_KEY_MAP[key]] = value
        except KeyError:
            known = ", ".join(sorted(_KEY_MAP))
            raise ConfigError(f"unknown config key {key!r}; known keys: {known}") from None
    cfg = RunConfig(**kwargs)
    if base_dir is not None:
        base = Path(base_dir)
        cfg = replace(
            cfg,
            manifest=cfg.manifest if cfg.manifest.is_absolute() else base / cfg.manifest,
            workdir=cfg.workdir if cfg.workdir.is_absolute() else base / cfg.workdir,
        )
        if cfg.texture_container != RANDOM_FALLBACK:
            container = Path(cfg.texture_container)
            if not container.is_absolute():
                cfg = replace(cfg, texture_container=str(base / container))
    return cfg


def load_config(path, seed=None) -> RunConfig:
    """Read and validate a config file; optional seed override."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    mapping = parse_config_text(p.read_text(), source=str(p))
    cfg = config_from_mapping(mapping, base_dir=p.parent)
    if seed is not None:
        cfg = replace(cfg, seed=int(seed))
    return cfg


def default_config_text() -> str:
    """A fully-commented config template with every key at its default."""
    d = RunConfig()
    return "\n".join(
        [
            "# stylesym run configuration (flat TOML subset: sections,",
            "# key = value, strings quoted, # comments)",
            "[run]",
            'manifest = "manifest.csv"',
            'workdir = "work"',
            f"seed = {d.seed}",
            "",
            "[mlp]",
            f"width = {d.mlp_width}",
            f"depth = {d.mlp_depth}",
            f"epochs = {d.mlp_epochs}",
            f"batch_size = {d.mlp_batch_size}",
            f"learning_rate = {d.mlp_learning_rate}",
            f"weight_decay = {d.mlp_weight_decay}",
            f"image_size = {d.mlp_image_size}",
            "",
            "[algebra]",
            f'mode = "{d.algebra}"          # affine2d | pixel-linear',
            f"generators = {d.generator_count}",
            "",
            "[texture]",
            f'container = "{RANDOM_FALLBACK}"  # or a weights-container path',
            '# layers = "conv1_1,conv2_1,conv3_1,conv4_1"',
            f"image_size = {d.texture_image_size}",
            "",
            "[distance]",
            f"lambda = {d.lam}",
            "",
            "[bootstrap]",
            f"b = {d.bootstrap_b}",
            f"threshold = {d.bootstrap_threshold}",
            "",
            "[mantel]",
            f"permutations = {d.mantel_permutations}",
            f'ground_truth = "{d.ground_truth}"   # basic | standard | detailed',
            "",
            "[flow]",
            f"delta = {d.flow_delta}",
            "",
        ]
    )
