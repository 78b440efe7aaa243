"""Independent high-precision values frozen into the unit tests.

Everything here is evaluated from first principles with mpmath: complex ring
arithmetic, Taylor expansion of the exact transmission, and the closed-form
link budget written out term by term. No code is shared with the C++ library.

    python3 goldens.py          # prints every golden with 17 significant digits
"""
import mpmath as mp

mp.mp.dps = 40
pi = mp.pi

# Default link (the reference parameter table)
P_LASER = mp.mpf(10) ** mp.mpf('1.3') / 1000      # 13 dBm
RIN = mp.mpf(10) ** mp.mpf('-14.5')              # -145 dB/Hz
VPI = mp.mpf(5)
L_MOD = mp.mpf(10)                               # 10 dB insertion loss
RS = RL = mp.mpf(50)
RD = mp.mpf('1.1')
Q = mp.mpf('1.602176634e-19')
KB = mp.mpf('1.380649e-23')
T0 = mp.mpf(290)


def ring(theta, tau, alpha=1):
    z = alpha * mp.expj(-theta)
    return (tau - z) / (1 - tau * z)


def field(theta_mod, phi, thdc, tau, alpha=1, psi=0):
    # each arm carries |a| exp(-j(bias + arg a)), i.e. conj(a) times the bias phasor
    up = mp.conj(ring(thdc + theta_mod, tau, alpha)) * mp.expj(-(phi - psi))
    dn = mp.conj(ring(thdc - theta_mod, tau, alpha))
    return (up + dn) / 2


def transmission(theta_mod, phi, thdc, tau, alpha=1, psi=0):
    return abs(field(theta_mod, phi, thdc, tau, alpha, psi)) ** 2


def gammas(phi, thdc, tau, alpha=1):
    """gamma0..gamma4 under T = g0/2 - g1 x - g2 x^2 + g3 x^3 + g4 x^4."""
    c = mp.taylor(lambda x: transmission(x, phi, thdc, tau, alpha), 0, 4)
    return [2 * c[0], -c[1], -c[2], c[3], c[4]]


def link_gain(g1, vpi_eff=VPI, l_ch=1):
    s = pi * abs(g1) * P_LASER * RS / (vpi_eff * L_MOD)
    return s**2 / RS * (1 / mp.mpf(l_ch)) ** 2 * RD**2 * RL


def photocurrent(phi):
    return RD * P_LASER * (1 + mp.cos(phi)) / (2 * L_MOD)


def nf_db(gain, i_d, conv=1):
    kt = KB * T0
    det = RL / 4 * (i_d**2 / 2 * RIN + 2 * Q * i_d)
    g = gain * conv
    return 10 * mp.log10(1 + det / (kt * g) + 1 / g)


def iip3_eq(thdc, tau, vpi=VPI, rs=RS):
    c = mp.cos(thdc)
    num = 2 * vpi**2 * (tau**2 - 2 * c * tau + 1) ** 2
    den = pi**2 * rs * (2 * c**2 * tau**2 + (tau**3 + tau) * c + 2 * tau**4 - 8 * tau**2 + 2)
    return num / den


def iip2_eq(phi, thdc, tau, vpi=VPI, rs=RS):
    return vpi**2 * (tau**2 - 2 * mp.cos(thdc) * tau + 1) ** 2 * mp.tan(phi) ** 2 / (2 * pi**2 * rs * (tau**2 - 1) ** 2)


def bin_factor(order, k1, k2, n=32):
    """Amplitude of (sin a + sin b)^order at k1 a + k2 b (exact for n > order)."""
    acc = mp.mpc(0)
    for i in range(n):
        for j in range(n):
            a, b = 2 * pi * i / n, 2 * pi * j / n
            acc += (mp.sin(a) + mp.sin(b)) ** order * mp.expj(-(k1 * a + k2 * b))
    return abs(acc) * 2 / n**2


def iip5_linearized():
    """Fifth-order intercept at the third-order null from the dominant IM5 product."""
    c = mp.taylor(lambda x: transmission(x, pi / 2, pi, mp.mpf('0.5')), 0, 5)
    k5 = max(bin_factor(5, 2, -1), bin_factor(5, 3, -2))
    # fundamental |c1| A, spur k5 |c5| A^5, A = pi V / Vpi, P_in = V^2 / (2 Rs)
    a_star = (abs(c[1]) / (k5 * abs(c[5]))) ** (mp.mpf(1) / 4)
    v = a_star * VPI / pi
    return v**2 / (2 * RS), k5


def sfdr(iip_w, g1, order, i_d):
    """Intercept-method SFDR with the available-power (4x) gain in the NF."""
    nf = nf_db(link_gain(g1), i_d, 4)
    n_in_dbm = 10 * mp.log10(KB * T0 * 1000) + nf
    return mp.mpf(order - 1) / order * (10 * mp.log10(iip_w * 1000) - n_in_dbm)


def fmt(x):
    return mp.nstr(x, 17, min_fixed=-3, max_fixed=3)


def main():
    r = ring(pi / 2, mp.mpf('0.5'), mp.mpf('0.95'))
    print('ring_response(pi/2, tau=0.5, alpha=0.95)', fmt(r.real), fmt(r.imag))
    print('ring_phase(2.0, tau=0.7)', fmt(mp.arg(ring(2, mp.mpf('0.7')))))
    print('mzm single T(0.3, pi/2)', fmt((1 + mp.cos(pi / 2 + mp.mpf('0.3'))) / 2))
    t_gen = transmission(mp.mpf('0.1'), pi / 2, pi, mp.mpf('0.5'), mp.mpf('0.98'))
    print('T(0.1; pi/2, pi, 0.5, alpha 0.98)', fmt(t_gen))

    zm = mp.mpc(5, -1 / (2 * pi * 1e10 * mp.mpf('200e-15')))
    gam = (zm - 50) / (zm + 50)
    print('lumped gamma', fmt(gam.real), fmt(gam.imag), '|gamma|', fmt(abs(gam)), 'v_gain', fmt(1 + abs(gam)))

    g_lin = link_gain(mp.mpf(1) / 3)
    i_q = photocurrent(pi / 2)
    print('linearized gain', fmt(g_lin), 'dB', fmt(10 * mp.log10(g_lin)))
    print('quadrature photocurrent', fmt(i_q))
    print('shot density', fmt(2 * Q * i_q))
    print('rin density', fmt(i_q**2 / 2 * RIN))
    print('linearized NF dB (closed-form gain)', fmt(nf_db(g_lin, i_q)))
    print('linearized NF dB (available-power gain)', fmt(nf_db(g_lin, i_q, 4)))

    print('GE iip3 W', fmt(iip3_eq(0, mp.mpf('0.5'))), 'dBm', fmt(10 * mp.log10(iip3_eq(0, mp.mpf('0.5')) * 1000)))
    print('iip2(pi/4, pi, 0.5) W', fmt(iip2_eq(pi / 4, pi, mp.mpf('0.5'))))

    g = gammas(pi / 2, mp.mpf(2), mp.mpf('0.7'), mp.mpf('0.97'))
    print('gammas(pi/2, 2.0, 0.7, alpha 0.97)', ' '.join(fmt(x) for x in g))
    g = gammas(pi / 2, mp.mpf('2.5'), mp.mpf('0.6'))
    print('gammas(pi/2, 2.5, 0.6)', ' '.join(fmt(x) for x in g))

    # even-order identity with lossy rings: T(x) + T(-x) = (|a+|^2 + |a-|^2) / 2
    x, th, tau, al = mp.mpf('0.3'), mp.mpf('2.0'), mp.mpf('0.7'), mp.mpf('0.9')
    s = transmission(x, pi / 2, th, tau, al) + transmission(-x, pi / 2, th, tau, al)
    print('T(0.3)+T(-0.3) at (pi/2, 2.0, 0.7, alpha 0.9)', fmt(s),
          'half ring power sum', fmt((abs(ring(th + x, tau, al))**2 + abs(ring(th - x, tau, al))**2) / 2))

    p5, k5 = iip5_linearized()
    print('K5', fmt(k5))
    print('linearized iip5 W', fmt(p5), 'dBm', fmt(10 * mp.log10(p5 * 1000)))

    half = mp.mpf('0.5')
    mzm_iip3 = 2 * VPI**2 * 6 / (3 * pi**2 * RS)    # |g1/g3| = (1/2)/(1/12)
    print('SFDR linearized (fifth order)', fmt(sfdr(p5, mp.mpf(1) / 3, 5, i_q)))
    print('SFDR mzm single quadrature', fmt(sfdr(mzm_iip3, half, 3, i_q)))
    print('SFDR gain-enhanced', fmt(sfdr(iip3_eq(0, half), 3, 3, i_q)))


if __name__ == '__main__':
    main()
