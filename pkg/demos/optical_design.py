"""Tour of the optical-lattice design helpers.

Potential minima for the standard beam configuration, the polarization
triplet across its validity window, and one shaped gate pulse.
"""

import numpy as np

from zngauge.optical import (
    polarization_vectors,
    shaping_schedule,
    v_mat,
    v_mat_minima,
    wave_vectors,
)


def main():
    print("standard configuration potential samples:")
    for x, y in ((0.0, 0.0), (0.5, 0.0), (0.5, 0.5), (0.25, 0.25)):
        print(f"    V({x:.2f}, {y:.2f}) = {float(v_mat(x, y, 0, 0, 0, 0)):.6f}")
    minima = v_mat_minima(0.0, 0.0, 0.0, 0.0, (-0.4, 1.4, -0.4, 1.4))
    print(f"minima in one unit cell window: {sorted((round(x, 6), round(y, 6)) for x, y in minima)}")

    print("polarization triplet across the validity window:")
    print("    xi     |e1.e2|     |e1.e3|     |e2.e3|    valid")
    for xi in np.linspace(0.05, 0.40, 8):
        e1, e2, e3, valid = polarization_vectors(float(xi))
        print(f"  {xi:.3f}   {abs(np.dot(e1, e2)):.2e}   {abs(np.dot(e1, e3)):.2e}"
              f"   {abs(np.dot(e2, e3)):.2e}    {valid}")

    k1, k2, k3 = wave_vectors(0.2)
    print(f"wave vector magnitudes at xi=0.2: "
          f"{np.linalg.norm(k1):.4f} {np.linalg.norm(k2):.4f} {np.linalg.norm(k3):.4f}")

    pulse = shaping_schedule("eh", 2.0, 8.0, n_samples=9)
    print("eh pulse (t, f, g, h, phi):")
    for row in pulse:
        print("   ", " ".join(f"{v:7.4f}" for v in row))


if __name__ == "__main__":
    main()
