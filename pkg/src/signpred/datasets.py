"""Dataset registry, download cache and configuration."""

from __future__ import annotations

import gzip
import io
import logging
import os
import shutil
import tempfile
import urllib.request
from dataclasses import dataclass, replace
from pathlib import Path

from .graph import SignedDigraph, load_edge_list, read_edge_list, write_edge_list

log = logging.getLogger(__name__)

CACHE_ENV = "SIGNPRED_CACHE"
CONFIG_ENV = "SIGNPRED_CONFIG"


class DatasetError(RuntimeError):
    pass


@dataclass(frozen=True)
class DatasetEntry:
    name: str
    url: str
    edges: int
    nodes: int | None = None
    note: str = ""


# The Wikipedia signed network is distributed as raw RfA election records,
# not as an edge list; point ``wikipedia.url`` at a converted file.
REGISTRY: dict[str, DatasetEntry] = {
    "wikipedia": DatasetEntry(
        "wikipedia",
        "",
        edges=103_747,
        nodes=7_118,
        note="set wikipedia.url in the config file to a converted 'src dst sign' edge list",
    ),
    "slashdot": DatasetEntry(
        "slashdot",
        "https://snap.stanford.edu/data/soc-sign-Slashdot090221.txt.gz",
        edges=549_202,
        nodes=82_144,
    ),
    "epinions": DatasetEntry(
        "epinions",
        "https://snap.stanford.edu/data/soc-sign-epinions.txt.gz",
        edges=841_372,
        nodes=119_217,
    ),
}


@dataclass
class Config:
    registry: dict[str, DatasetEntry]
    cache_dir: Path
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    output_format: str = "text"


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(Path.home(), ".cache")
    return Path(base) / "signpred"


def parse_config(text: str, base: Config | None = None) -> Config:
    """Apply ``key = value`` lines to a config.

    Keys are ``cache_dir``, ``seeds`` (comma separated), ``format`` and
    ``<dataset>.url`` / ``<dataset>.edges`` / ``<dataset>.nodes``; an unknown
    dataset name creates a new registry entry.
    """
    cfg = base or Config(dict(REGISTRY), default_cache_dir())
    registry = dict(cfg.registry)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (p.strip() for p in line.partition("="))
        if not sep or not key:
            raise DatasetError(f"config line {lineno}: expected 'key = value'")
        if key == "cache_dir":
            cfg.cache_dir = Path(value).expanduser()
        elif key == "seeds":
            cfg.seeds = tuple(int(s) for s in value.split(",") if s.strip())
        elif key == "format":
            cfg.output_format = value
        elif "." in key:
            name, attr = key.rsplit(".", 1)
            entry = registry.get(name, DatasetEntry(name, "", edges=-1))
            if attr == "url":
                entry = replace(entry, url=value)
            elif attr in ("edges", "nodes"):
                entry = replace(entry, **{attr: int(value.replace(",", "").replace("_", ""))})
            else:
                raise DatasetError(f"config line {lineno}: unknown dataset field {attr!r}")
            registry[name] = entry
        else:
            raise DatasetError(f"config line {lineno}: unknown key {key!r}")
    cfg.registry = registry
    return cfg


def load_config(path: str | os.PathLike | None = None) -> Config:
    cfg = Config(dict(REGISTRY), default_cache_dir())
    path = path or os.environ.get(CONFIG_ENV)
    if path:
        cfg = parse_config(Path(path).read_text(encoding="utf-8"), cfg)
    return cfg


def lookup(cfg: Config, name: str) -> DatasetEntry:
    try:
        return cfg.registry[name.lower()]
    except KeyError:
        raise DatasetError(
            f"unknown dataset {name!r}; known datasets: {', '.join(sorted(cfg.registry))}"
        ) from None


def cached_path(cfg: Config, name: str) -> Path:
    return cfg.cache_dir / f"{lookup(cfg, name).name}.edges"


def _open_source(url: str) -> bytes:
    if "://" not in url:
        return Path(url).expanduser().read_bytes()
    with urllib.request.urlopen(url, timeout=120) as resp:
        return resp.read()


def _count_data_lines(text: str) -> int:
    return sum(1 for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#"))


def fetch(cfg: Config, name: str) -> Path:
    """Download (once) and cache a dataset as a canonical edge list."""
    entry = lookup(cfg, name)
    target = cached_path(cfg, name)
    if target.exists():
        return target
    if not entry.url:
        raise DatasetError(f"no source for dataset {entry.name!r}: {entry.note or 'set its url'}")
    log.info("fetching %s from %s", entry.name, entry.url)
    try:
        raw = _open_source(entry.url)
    except OSError as exc:
        raise DatasetError(f"could not fetch {entry.name}: {exc}") from exc
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    text = raw.decode("utf-8")
    count = _count_data_lines(text)
    if entry.edges >= 0 and count != entry.edges:
        raise DatasetError(
            f"{entry.name}: expected {entry.edges} edges, downloaded file has {count}"
        )
    g = load_edge_list(
        io.StringIO(text), allow_hidden=False, drop_self_loops=True, drop_duplicates=True
    )
    if g.edge_count != count:
        log.warning(
            "%s: dropped %d self-loop or duplicate lines", entry.name, count - g.edge_count
        )
    target.parent.mkdir(parents=True, exist_ok=True)
    with tempfile.NamedTemporaryFile("w", dir=target.parent, delete=False, encoding="utf-8") as tmp:
        write_edge_list(g, tmp, header=(f"{entry.name}: {g.node_count} nodes, {g.edge_count} edges",))
    shutil.move(tmp.name, target)
    return target


def load_dataset(cfg: Config, name: str, download: bool = True) -> SignedDigraph:
    path = fetch(cfg, name) if download else cached_path(cfg, name)
    if not path.exists():
        raise DatasetError(f"dataset {name!r} is not cached at {path}; run 'signpred fetch {name}'")
    return read_edge_list(path)
