"""Walk through the clock and shift pair for N = 2..5.

Prints the defining relations, the Fourier intertwiner, and the
branch-balanced logarithms that the electric-field gates exponentiate.
"""

import numpy as np

from zngauge.algebra import make_link_algebra, symmetric_representatives


def residual(a: np.ndarray) -> float:
    return float(np.abs(a).max())


def main():
    for N in (2, 3, 4, 5):
        alg = make_link_algebra(N)
        omega = np.exp(2j * np.pi / N)
        eye = np.eye(N)
        print(f"N = {N}")
        print(f"  P^N - 1          : {residual(np.linalg.matrix_power(alg.p, N) - eye):.2e}")
        print(f"  Q^N - 1          : {residual(np.linalg.matrix_power(alg.q, N) - eye):.2e}")
        print(f"  P Q Pdag - wQ    : {residual(alg.p @ alg.q @ alg.p.conj().T - omega * alg.q):.2e}")
        print(f"  Vdag P V - Q     : {residual(alg.dft.conj().T @ alg.p @ alg.dft - alg.q):.2e}")
        eigs = np.sort(np.linalg.eigvals(alg.log_p / 1j).real)
        print(f"  spec(log P / i)  : {np.array2string(eigs, precision=4)}")

    alg = make_link_algebra(3)
    closed = (2 * np.pi / (3 * np.sqrt(3))) * (alg.p - alg.p.conj().T)
    print("N = 3 closed-form log P (difference form):")
    print(f"  deviation from branch-balanced log: {residual(alg.log_p - closed):.2e}")
    print("  symmetric charge representatives per N:")
    for N in (2, 3, 4, 5):
        reps = symmetric_representatives(N).astype(int)
        print(f"    N = {N}: {reps.tolist()}")


if __name__ == "__main__":
    main()
