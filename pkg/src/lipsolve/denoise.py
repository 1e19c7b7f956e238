"""Sliding-patch image denoising harness.

Every overlapping m-by-m patch is treated as one inverse problem with the
orthonormal inverse DCT2 dictionary and the l1 cost; the recovered patch is
phi(f*) and pixels are averaged over all covering patches.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import baselines, flips
from .objective import e_residual, make_instance
from .operators import InverseDct2Operator


@dataclass
class Image:
    """Grayscale image, pixels row-major in [0, 1] (clamped on write)."""

    pixels: np.ndarray  # shape (height, width)

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]


def load_pgm(path):
    """Read a binary (P5) PGM file into an Image with unit range."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = []
    i = 0
    while len(tokens) < 4:
        if data[i : i + 1] == b"#":
            while data[i : i + 1] not in (b"\n", b""):
                i += 1
            i += 1
            continue
        if data[i : i + 1].isspace():
            i += 1
            continue
        j = i
        while not data[j : j + 1].isspace():
            j += 1
        tokens.append(data[i:j])
        i = j
    if tokens[0] != b"P5":
        raise ValueError(f"not a binary PGM file: magic {tokens[0]!r}")
    width, height, maxval = (int(t) for t in tokens[1:4])
    i += 1  # single whitespace after the header
    raw = np.frombuffer(data[i : i + width * height], dtype=np.uint8)
    if raw.size != width * height:
        raise ValueError("truncated PGM pixel data")
    return Image(pixels=raw.reshape(height, width).astype(float) / maxval)


def save_pgm(path, img):
    pix = np.clip(img.pixels, 0.0, 1.0)
    raw = np.round(pix * 255.0).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.width} {img.height}\n255\n".encode())
        fh.write(raw.tobytes())


def add_gaussian_noise(img, sigma_var, seed):
    """Add i.i.d. zero-mean Gaussian noise of the given variance."""
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, np.sqrt(sigma_var), size=img.pixels.shape)
    return Image(pixels=img.pixels + noise)


def psnr(reference, candidate):
    """10 log10(1 / MSE) for unit dynamic range."""
    mse = float(np.mean((reference.pixels - candidate.pixels) ** 2))
    if mse == 0.0:
        return np.inf
    return 10.0 * np.log10(1.0 / mse)


class PatchGrid:
    """Index map of m-by-m patches at a fixed stride, with the per-pixel
    coverage counts used for overlap averaging."""

    def __init__(self, height, width, patch_side, stride=1):
        m = int(patch_side)
        if m > min(height, width):
            raise ValueError("patch side exceeds image size")
        if not 1 <= stride <= m:
            raise ValueError("stride must lie in [1, patch side] to cover "
                             "every pixel")
        rows = list(range(0, height - m + 1, stride))
        cols = list(range(0, width - m + 1, stride))
        # keep the trailing edge covered for stride > 1
        if rows[-1] != height - m:
            rows.append(height - m)
        if cols[-1] != width - m:
            cols.append(width - m)
        self.patch_side = m
        self.origins = [(r, c) for r in rows for c in cols]
        self.coverage = np.zeros((height, width))
        for r, c in self.origins:
            self.coverage[r : r + m, c : c + m] += 1.0
        assert (self.coverage >= 1.0).all()

    def __len__(self):
        return len(self.origins)

    def extract(self, img, idx):
        r, c = self.origins[idx]
        m = self.patch_side
        return img.pixels[r : r + m, c : c + m].ravel()

    def reconstruct(self, patches):
        """Average overlapping patches back into an image."""
        h, w = self.coverage.shape
        m = self.patch_side
        acc = np.zeros((h, w))
        for (r, c), patch in zip(self.origins, patches):
            acc[r : r + m, c : c + m] += patch.reshape(m, m)
        return Image(pixels=acc / self.coverage)


def eps_from_rule(rule, sigma_var, patch_side):
    """Residual level from the noise variance.

    ``pixel-count`` uses eps = sqrt(sigma * m^2), matching the expected
    noise norm of an m-by-m patch; ``side`` uses eps = sqrt(sigma * m).
    """
    if rule == "pixel-count":
        return float(np.sqrt(sigma_var * patch_side**2))
    if rule == "side":
        return float(np.sqrt(sigma_var * patch_side))
    raise ValueError(f"unknown eps rule {rule!r}")


@dataclass
class DenoiseReport:
    psnr_noisy: float
    psnr_recovered: float
    eps: float
    patch_side: int
    n_patches: int
    e_fstar: np.ndarray
    iterations: np.ndarray
    wall_time: float
    hist_counts: np.ndarray = field(default=None)
    hist_edges: np.ndarray = field(default=None)

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("key,value\n")
            fh.write(f"psnr_noisy,{self.psnr_noisy:.12f}\n")
            fh.write(f"psnr_recovered,{self.psnr_recovered:.12f}\n")
            fh.write(f"eps,{self.eps:.17g}\n")
            fh.write(f"patch_side,{self.patch_side}\n")
            fh.write(f"n_patches,{self.n_patches}\n")
            fh.write(f"mean_iterations,{float(np.mean(self.iterations)):.12f}\n")
            fh.write(f"max_e_fstar,{float(np.max(self.e_fstar)):.17g}\n")
            fh.write(f"eps_squared,{self.eps**2:.17g}\n")


def _solve_patch(x, op, eps, solver, solver_cfg):
    """Dispatch one patch to the requested solver; returns (f_star, trace)."""
    inst = make_instance(x, op, eps)
    if solver == "flips":
        return flips.flips_solve(inst, solver_cfg)
    if solver == "cp":
        cfg = solver_cfg or baselines.default_cp_config(inst)
        return baselines.cp_solve(inst, cfg)
    if solver == "csalsa":
        cfg = solver_cfg or baselines.default_csalsa_config(inst)
        return baselines.csalsa_solve(inst, cfg)
    if solver == "pagd":
        inv_b, max_iters = solver_cfg
        return baselines.pagd_solve(inst, inv_b, max_iters=max_iters)
    if solver == "acp":
        from .objective import eta_hat_candidate, eta_bar_lower, regularity_constants

        reg = regularity_constants(inst, eta_bar_lower(inst), eta_hat_candidate(inst))
        cfg = baselines.acp_config_from_constants(inst, reg, max_iters=solver_cfg)
        h, lam, trace = baselines.acp_solve(inst, cfg)
        from .objective import evaluate

        ev = evaluate(inst, h)
        return ev.eta * h, trace
    raise ValueError(f"unknown solver {solver!r}")


def denoise(img_noisy, patch_side, solver="flips", solver_cfg=None,
            eps_rule="pixel-count", sigma_var=0.0055, stride=1,
            img_clean=None):
    """Denoise by per-patch solving; returns (Image, DenoiseReport).

    Patches with ||x|| <= eps are degenerate (zero is feasible) and map to
    the zero signal directly.
    """
    if solver == "flips" and solver_cfg is None:
        solver_cfg = flips.FlipsConfig(
            oracle="quadratic",
            inv_beta=DEFAULT_INV_BETA.get(patch_side, 1e-3),
            max_iters=50,
        )
    t0 = time.perf_counter()
    grid = PatchGrid(img_noisy.height, img_noisy.width, patch_side, stride)
    op = InverseDct2Operator(patch_side)
    eps = eps_from_rule(eps_rule, sigma_var, patch_side)
    recon_patches = []
    e_vals = []
    iters = []
    for idx in range(len(grid)):
        x = grid.extract(img_noisy, idx)
        if float(np.linalg.norm(x)) <= eps:
            recon_patches.append(np.zeros_like(x))
            e_vals.append(float(x @ x))
            iters.append(0)
            continue
        f_star, trace = _solve_patch(x, op, eps, solver, solver_cfg)
        recon_patches.append(op.apply(f_star))
        inst = make_instance(x, op, eps)
        e_vals.append(e_residual(inst, f_star))
        iters.append(len(trace))
    recovered = grid.reconstruct(recon_patches)
    reference = img_clean if img_clean is not None else img_noisy
    report = DenoiseReport(
        psnr_noisy=psnr(reference, img_noisy),
        psnr_recovered=psnr(reference, recovered),
        eps=eps,
        patch_side=patch_side,
        n_patches=len(grid),
        e_fstar=np.array(e_vals),
        iterations=np.array(iters),
        wall_time=time.perf_counter() - t0,
    )
    counts, edges = efstar_histogram(report)
    report.hist_counts, report.hist_edges = counts, edges
    return recovered, report


# Per-patch-side default 1/beta steps for the quadratic oracle, tuned
# for the pixel-count residual rule.
DEFAULT_INV_BETA = {4: 8e-2, 8: 5e-2, 16: 1.6e-3, 32: 2.8e-4, 64: 2.8e-5}


def synthetic_image(size=64, seed=0):
    """Deterministic piecewise-smooth grayscale test image.

    Smooth gradient background with a bright disk, a dark rectangle and a
    diagonal stripe; compressible under the patchwise DCT like a natural
    photograph.
    """
    n = int(size)
    yy, xx = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    img = 0.25 + 0.4 * (xx / (n - 1)) + 0.15 * np.sin(2.0 * np.pi * yy / n)
    disk = (yy - 0.35 * n) ** 2 + (xx - 0.6 * n) ** 2 < (0.18 * n) ** 2
    img[disk] = 0.9
    img[int(0.6 * n) : int(0.85 * n), int(0.15 * n) : int(0.4 * n)] = 0.12
    stripe = np.abs((yy - xx) - 0.1 * n) < 0.03 * n
    img[stripe] = 0.75
    rng = np.random.default_rng(seed)
    img = img + 0.01 * rng.standard_normal((n, n))
    return Image(pixels=np.clip(img, 0.0, 1.0))


def efstar_histogram(report, bandwidth=0.01):
    """Fixed-bandwidth histogram of the per-patch e(f*) values.

    Asserts the strict separation max e(f*) < eps^2.
    """
    e_vals = np.asarray(report.e_fstar, dtype=float)
    assert float(e_vals.max(initial=0.0)) < report.eps**2
    top = max(report.eps**2, float(e_vals.max(initial=0.0)) + bandwidth)
    edges = np.arange(0.0, top + bandwidth, bandwidth)
    counts, edges = np.histogram(e_vals, bins=edges)
    assert counts.sum() == e_vals.size
    return counts, edges


def histogram_to_csv(path, counts, edges):
    with open(path, "w") as fh:
        fh.write("bin_left,count\n")
        for left, cnt in zip(edges[:-1], counts):
            fh.write(f"{left:.17g},{int(cnt)}\n")


def iterations_to_threshold(traces_dists, thresh, max_iters):
    """Mean over patches of the first iteration within thresh of the
    reference signal; non-converged runs count as max_iters.

    ``traces_dists`` is a sequence of per-iteration distance arrays.
    """
    firsts = []
    for dists in traces_dists:
        dists = np.asarray(dists, dtype=float)
        hit = np.nonzero(dists <= thresh)[0]
        firsts.append(int(hit[0]) + 1 if hit.size else int(max_iters))
    return float(np.mean(firsts))
