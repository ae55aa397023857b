"""Analysis extensions: top-k retrieval inspection and topological overlays.

A retrieval epoch is a query-by-gallery distance matrix dumped during
training; topk/topk_accuracy drive the tabulated viewer. An HTMap-style
overlay assigns each pose a location id and lists loop-closure pose pairs.
"""

import json

import numpy as np

from trajkit import Pose, RetrievalEpoch, Trajectory, load_htmap, topk, topk_accuracy

rng = np.random.default_rng(3)

# Synthetic embedding-distance dump: 6 queries against a 10-image gallery.
# Same-label entries get smaller distances, with noise.
query_labels = (0, 1, 2, 3, 4, 5)
gallery_labels = (0, 0, 1, 2, 2, 3, 4, 5, 5, 9)
distances = rng.uniform(2.0, 8.0, size=(6, 10))
for qi, ql in enumerate(query_labels):
    for gj, gl in enumerate(gallery_labels):
        if ql == gl:
            distances[qi, gj] = rng.uniform(0.1, 3.0)

epoch = RetrievalEpoch(
    step=32949,
    distances=distances,
    query_labels=query_labels,
    gallery_labels=gallery_labels,
    index_to_image={j: f"gallery/{j:03d}.jpg" for j in range(10)},
)

print(f"epoch step {epoch.step}")
for k in (1, 3, 5):
    print(f"  top-{k} accuracy: {topk_accuracy(epoch, k):.3f}")
print("query 0 top-3:", [(j, round(d, 2)) for j, d in topk(epoch, 0, 3)])

# A looped drive: poses 0..49 out, 50..99 back over the same street.
poses = [
    Pose(index=i, timestamp=float(i),
         position=(float(i) if i < 50 else float(99 - i), 0.0, 0.0),
         orientation=(0.0, 0.0, 0.0))
    for i in range(100)
]
loop_drive = Trajectory(id="loop", source_format="kitti", poses=poses)

overlay_doc = {
    "nodes": [i // 25 for i in range(100)],          # four topological locations
    "loops": [[i, 99 - i] for i in range(0, 50, 10)],  # closures across the laps
}
overlay = load_htmap(json.dumps(overlay_doc), loop_drive)
print(f"locations: {overlay.location_ids}")
print(f"loop closures: {overlay.loop_closures}")
