import os
import numpy as np
import imageio
import matplotlib.pyplot as plt

# Output directory of generated images
output_dir = os.environ.get('SSC_FUNCTEST_OUTPUT', 'functest_output')


def save(path, img):
    """Save an RGB(A) float image in [0, 1]"""
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    imageio.imwrite(path, np.clip(img * 255, 0, 255).astype(np.uint8))


def label_image(grid, z):
    """Render the z-th slice of a label grid as an RGBA image"""
    cmap = plt.get_cmap('tab20')
    labels = grid.labels[:, :, z].T[::-1]
    img = cmap(labels.astype(np.float64) / max(grid.spec.num_classes - 1, 1))
    img[labels == grid.spec.empty_label] = 1
    img[labels == grid.spec.ignore_label] = (0, 0, 0, 1)
    return img


def changed_voxels(a, b):
    return int(np.count_nonzero(a.labels != b.labels))
