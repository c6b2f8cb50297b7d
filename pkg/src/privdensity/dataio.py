"""Reading datasets and writing curves and plots."""

from __future__ import annotations

import csv

import numpy as np

from .errors import ConfigError, InputError


def read_dataset(path) -> np.ndarray:
    """One decimal float per line; blank lines are ignored."""
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                v = float(text)
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: cannot parse {text!r} as a number") from None
            if not 0.0 <= v <= 1.0:
                raise InputError(f"{path}:{lineno}: value {text} lies outside [0, 1]")
            values.append(v)
    if not values:
        raise InputError(f"{path}: no data")
    return np.array(values)


def write_dataset(path, data) -> None:
    with open(path, "w") as fh:
        for v in np.asarray(data, dtype=float):
            fh.write(f"{float(v)!r}\n")


def write_curve(path, x, y, header_lines=()) -> None:
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(["x", "value"])
        for a, b in zip(x, y):
            w.writerow([repr(float(a)), repr(float(b))])


def line_plot(path, series, *, xlabel="x", ylabel="", title="", logx=False, logy=False) -> None:
    """Write an SVG line plot; ``series`` is a list of (label, x, y).

    The SVG is byte-stable across runs (no timestamp, fixed id salt).
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "privdensity", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        for label, x, y in series:
            ax.plot(x, y, marker="o" if len(x) < 40 else None, label=label)
        if logx:
            ax.set_xscale("log")
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if len(series) > 1:
            ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
