"""Synthetic oriented-grating datasets for end-to-end checks."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .imageio import GrayImage, write_pgm


def grating(size: int, angle: float, period: float, phase: float, amplitude: float = 80.0):
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    proj = xx * np.cos(angle) + yy * np.sin(angle)
    return 127.5 + amplitude * np.sin(2 * np.pi * proj / period + phase)


def grating_dataset(n_classes: int = 6, per_class: int = 60, n_subjects: int = 10,
                    size: int = 128, noise: float = 10.0, seed: int = 42):
    """Return ``(images, labels, subjects)``.

    Class ``k`` is a sinusoidal grating at ``k * 180 / n_classes`` degrees.
    Each subject has its own period and contrast; each image gets a random
    phase, a small orientation jitter and additive Gaussian noise.
    """
    rng = np.random.default_rng(seed)
    periods = rng.uniform(6.0, 14.0, n_subjects)
    amplitudes = rng.uniform(50.0, 90.0, n_subjects)
    images, labels, subjects = [], [], []
    for k in range(n_classes):
        base = np.pi * k / n_classes
        for i in range(per_class):
            s = i % n_subjects
            angle = base + rng.normal(0.0, np.deg2rad(2.0))
            img = grating(size, angle, periods[s], rng.uniform(0, 2 * np.pi), amplitudes[s])
            img = img + rng.normal(0.0, noise, img.shape)
            images.append(GrayImage(np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)))
            labels.append(f"o{round(np.rad2deg(base)):03d}")
            subjects.append(f"s{s:02d}")
    return images, labels, subjects


def write_dataset(directory, **kwargs) -> Path:
    """Write a grating dataset as PGM files plus ``manifest.jsonl``; return the manifest path."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    images, labels, subjects = grating_dataset(**kwargs)
    lines = []
    for i, (img, lab, subj) in enumerate(zip(images, labels, subjects)):
        name = f"{lab}_{subj}_{i:04d}.pgm"
        write_pgm(out / name, img.pixels)
        lines.append(json.dumps({"path": name, "subject": subj, "label": lab}))
    manifest = out / "manifest.jsonl"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest
