"""Uniform vs adaptive subsampling on a route with a tight corner.

Uniform decimation keeps one pose per tau_d meters and starves corners,
where heading (and image content) changes fastest. The adaptive sampler
also triggers on accumulated heading change, so turns stay dense. Saves a
side-by-side plot when matplotlib is importable.
"""

import math
from pathlib import Path

from trajkit import Pose, SamplingParams, sample_adaptive, sample_uniform

out = Path(__file__).parent / "output"
out.mkdir(exist_ok=True)


def build_route():
    """200 m straight, a 90-degree corner at 1 deg / 0.1 m, 200 m straight."""
    headings = [0.0] * 200 + [float(j + 1) for j in range(90)] + [90.0] * 200
    steps = [1.0] * 199 + [0.1] * 90 + [1.0] * 200
    poses = [Pose(index=0, timestamp=0.0, position=(0.0, 0.0, 0.0),
                  orientation=(0.0, 0.0, 0.0))]
    x = y = 0.0
    for k, step in enumerate(steps, start=1):
        yaw = math.radians(headings[k])
        x += step * math.sin(yaw)
        y += step * math.cos(yaw)
        poses.append(Pose(index=k, timestamp=float(k), position=(x, y, 0.0),
                          orientation=(0.0, 0.0, yaw)))
    return poses


poses = build_route()
uniform = sample_uniform(poses, 12.0)
adaptive = sample_adaptive(poses, SamplingParams(mode="adaptive", tau_d=12.0, tau_theta=15.0))

turn = range(200, 290)
print(f"route: {len(poses)} poses, corner spans indices {turn.start}..{turn.stop - 1}")
print(f"uniform  tau_d=12:          {len(uniform.selected_indices):3d} poses, "
      f"{sum(1 for i in uniform.selected_indices if i in turn)} inside the corner")
print(f"adaptive tau_d=12 tau_th=15: {len(adaptive.selected_indices):3d} poses, "
      f"{sum(1 for i in adaptive.selected_indices if i in turn)} inside the corner")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, axes = plt.subplots(1, 2, figsize=(10, 5), sharex=True, sharey=True)
    xs = [p.position[0] for p in poses]
    ys = [p.position[1] for p in poses]
    for ax, result, title in (
        (axes[0], uniform, "uniform"),
        (axes[1], adaptive, "adaptive"),
    ):
        ax.plot(xs, ys, color="0.85", linewidth=1)
        sx = [poses[i].position[0] for i in result.selected_indices]
        sy = [poses[i].position[1] for i in result.selected_indices]
        ax.plot(sx, sy, "o-", markersize=3, linewidth=0.8)
        ax.set_title(f"{title}: {len(result.selected_indices)} poses")
        ax.set_aspect("equal")
    fig.tight_layout()
    target = out / "sampling_comparison.png"
    fig.savefig(target, dpi=120)
    print(f"wrote {target}")
