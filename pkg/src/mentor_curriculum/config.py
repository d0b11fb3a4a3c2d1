"""Sectioned key=value run configuration with strict validation.

A run is fully described by named sections of key=value entries (INI
syntax). Every key has a typed default; unknown sections or keys are
errors, listed all at once. Command-line overrides use section.key=value.
"""

import configparser
import hashlib
from dataclasses import dataclass

from .curriculum import CurriculumParams
from .data import CorruptionSpec, DatasetSpec
from .spade import TrainConfig


class ConfigError(ValueError):
    pass


def _bool(raw):
    low = raw.strip().lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _int_list(raw):
    raw = raw.strip()
    return tuple(int(x) for x in raw.split(",")) if raw else ()


def _float_list(raw):
    raw = raw.strip()
    return tuple(float(x) for x in raw.split(",")) if raw else ()


# section -> key -> (parser, default-as-string)
SCHEMA = {
    "data": {
        "n": (int, "2500"),
        "classes": (int, "4"),
        "features": (int, "10"),
        "kind": (str, "gaussian-blobs"),
        "separation": (float, "3.0"),
        "val_fraction": (float, "0.2"),
    },
    "corruption": {
        "noise_fraction": (float, "0.2"),
        "exclude_true": (_bool, "false"),
    },
    "student": {
        "hidden": (_int_list, "32,32"),
        "keep_prob": (float, "1.0"),
        "theta0": (float, "1e-4"),
    },
    "mentor": {
        "window": (int, "1"),
        "burn_in_fraction": (float, "0.2"),
        "burn_in_keep_prob": (float, "0.75"),
        "update_fracs": (_float_list, "0.21,0.75"),
        "epochs": (int, "200"),
        "lr": (float, "1e-3"),
        "warm_start": (_bool, "false"),
        "fix_label": (_bool, "false"),
        "dprime_fraction": (float, "0.1"),
    },
    "curriculum": {
        "mode": (str, "mentornet-dd"),
        "kind": (str, "predefined-l1l2"),
        "lam1": (float, "0.5"),
        "lam2": (float, "1.0"),
        "gamma": (float, "1.0"),
        "lam": (float, "1.0"),
        "switch_pct": (int, "50"),
    },
    "train": {
        "epochs": (int, "40"),
        "batch_size": (int, "128"),
        "lr": (float, "0.1"),
        "schedule": (str, "step"),
        "lr_decay_fracs": (_float_list, "0.5,0.8"),
        "momentum": (float, "0.9"),
        "with_replacement": (_bool, "false"),
        "seed": (int, "0"),
    },
}


@dataclass(frozen=True)
class RunConfig:
    dataset: DatasetSpec
    corruption: CorruptionSpec
    train: TrainConfig
    raw: tuple  # canonical ((section, key, value-string), ...) for hashing


def _merge(path, overrides):
    values = {sec: dict((k, d) for k, (_, d) in keys.items())
              for sec, keys in SCHEMA.items()}
    problems = []
    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigError(f"config file not found: {path}")
        for sec in parser.sections():
            if sec not in SCHEMA:
                problems.append(f"unknown section [{sec}]")
                continue
            for key, raw in parser.items(sec):
                if key not in SCHEMA[sec]:
                    problems.append(f"unknown key {sec}.{key}")
                else:
                    values[sec][key] = raw
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            problems.append(f"override must look like section.key=value: {item!r}")
            continue
        target, raw = item.split("=", 1)
        sec, key = target.split(".", 1)
        if sec not in SCHEMA or key not in SCHEMA.get(sec, {}):
            problems.append(f"unknown key {sec}.{key}")
        else:
            values[sec][key] = raw
    if problems:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(problems))
    return values


def build_config(path=None, overrides=()) -> RunConfig:
    """Merge defaults, an optional config file, and overrides; validate
    every field against its type's invariants before anything runs."""
    values = _merge(path, overrides)
    parsed = {}
    problems = []
    for sec, keys in SCHEMA.items():
        parsed[sec] = {}
        for key, (cast, _) in keys.items():
            raw = values[sec][key]
            try:
                parsed[sec][key] = cast(raw)
            except ValueError as exc:
                problems.append(f"{sec}.{key}: {exc}")
    if problems:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(problems))

    p = parsed
    seed = p["train"]["seed"]
    try:
        dataset = DatasetSpec(
            n=p["data"]["n"], m=p["data"]["classes"], d=p["data"]["features"],
            kind=p["data"]["kind"], separation=p["data"]["separation"],
            seed=seed, val_fraction=p["data"]["val_fraction"],
        )
        corruption = CorruptionSpec(
            noise_fraction=p["corruption"]["noise_fraction"], seed=seed,
            exclude_true=p["corruption"]["exclude_true"],
        )
        curriculum = CurriculumParams(
            kind=p["curriculum"]["kind"], lam1=p["curriculum"]["lam1"],
            lam2=p["curriculum"]["lam2"], gamma=p["curriculum"]["gamma"],
            lam=p["curriculum"]["lam"], switch_pct=p["curriculum"]["switch_pct"],
        )
        epochs = p["train"]["epochs"]
        decay_epochs = tuple(
            int(f * epochs) if f < 1.0 else int(f)
            for f in p["train"]["lr_decay_fracs"]
        )
        train = TrainConfig(
            epochs=epochs,
            batch_size=p["train"]["batch_size"],
            lr=p["train"]["lr"],
            lr_schedule=p["train"]["schedule"],
            lr_decay_epochs=decay_epochs,
            momentum=p["train"]["momentum"],
            curriculum_mode=p["curriculum"]["mode"],
            curriculum=curriculum,
            burn_in_fraction=p["mentor"]["burn_in_fraction"],
            burn_in_keep_prob=p["mentor"]["burn_in_keep_prob"],
            mentor_update_fracs=p["mentor"]["update_fracs"],
            mentor_epochs=p["mentor"]["epochs"],
            mentor_lr=p["mentor"]["lr"],
            mentor_warm_start=p["mentor"]["warm_start"],
            dprime_fraction=p["mentor"]["dprime_fraction"],
            window=p["mentor"]["window"],
            theta0=p["student"]["theta0"],
            student_hidden=p["student"]["hidden"],
            student_keep_prob=p["student"]["keep_prob"],
            sample_with_replacement=p["train"]["with_replacement"],
            fix_label=p["mentor"]["fix_label"],
            seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc

    raw = tuple(sorted(
        (sec, key, str(values[sec][key]).strip())
        for sec in values for key in values[sec]
    ))
    return RunConfig(dataset=dataset, corruption=corruption, train=train, raw=raw)


def config_hash(config: RunConfig) -> str:
    text = "\n".join(f"{s}.{k}={v}" for s, k, v in config.raw)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]


def with_seed(config: RunConfig, seed: int) -> RunConfig:
    """Rebuild the config with a different seed (used for seed sweeps)."""
    overrides = [f"{s}.{k}={v}" for s, k, v in config.raw]
    overrides.append(f"train.seed={seed}")
    return build_config(None, overrides)
