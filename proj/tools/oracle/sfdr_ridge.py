"""Independent SFDR check on the third-order null ridge.

Series coefficients of T(theta_mod) at phi_bias = pi/2 come from mpmath Taylor
expansion of the exact ring phase; two-tone bin factors come from exact
trigonometric expansion. Nothing is shared with the C++ implementation.
"""
import sys
import mpmath as mp

mp.mp.dps = 40
pi = mp.pi
q, k, T0 = mp.mpf('1.602176634e-19'), mp.mpf('1.380649e-23'), 290
PI = mp.mpf(10) ** mp.mpf('1.3') * mp.mpf('1e-3')
RIN = mp.mpf(10) ** mp.mpf('-14.5')
VPI, L, RS, RL, RD = 5, 10, 50, 50, mp.mpf('1.1')


def ring_phase(th, tau):
    return mp.atan2((1 - tau**2) * mp.sin(th), 2 * tau - (1 + tau**2) * mp.cos(th))


def series(thdc, tau, phi=pi / 2):
    f = lambda x: (1 + mp.cos(phi + ring_phase(thdc + x, tau) - ring_phase(thdc - x, tau))) / 2
    return mp.taylor(f, 0, 5)


def bin_factor(order, k1, k2, n=64):
    # amplitude of (sin a + sin b)^order at k1*a + k2*b, exact via DFT on a 2D torus
    acc = mp.mpc(0)
    for i in range(n):
        for j in range(n):
            a, b = 2 * pi * i / n, 2 * pi * j / n
            acc += (mp.sin(a) + mp.sin(b)) ** order * mp.expj(-(k1 * a + k2 * b))
    return abs(acc) * 2 / n**2


K3 = bin_factor(3, 2, -1)
K5 = max(bin_factor(5, 2, -1), bin_factor(5, 3, -2))


def sfdr(thdc, tau, gain_factor=4):
    c = series(mp.mpf(thdc), mp.mpf(tau))
    g1 = abs(c[1])
    G = (pi * g1 * PI * RS * RD / (VPI * L)) ** 2 / RS * RL * gain_factor / RS * RS
    ID = RD * PI / (2 * L)
    det = RL / 4 * (ID**2 / 2 * RIN + 2 * q * ID)
    nin = k * T0 * (1 + det / (k * T0 * G) + 1 / G)
    kk = (pi / VPI) ** 2 * 2 * RS  # A^2 per watt of input
    out = {}
    if abs(c[3]) > 0:
        out[3] = mp.mpf(2) / 3 * 10 * mp.log10(g1 / (K3 * abs(c[3])) / kk / nin)
    out[5] = mp.mpf(4) / 5 * 10 * mp.log10(mp.sqrt(g1 / (K5 * abs(c[5]))) / kk / nin)
    return out


if __name__ == '__main__':
    print('K3', K3, 'K5', K5)
    for thdc, tau in [(pi, 0.5)] + [tuple(map(mp.mpf, a.split(','))) for a in sys.argv[1:]]:
        print(mp.nstr(thdc / pi, 8), mp.nstr(tau, 8), {o: mp.nstr(v, 10) for o, v in sfdr(thdc, tau).items()})
