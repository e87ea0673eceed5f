# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled trajectory kernel.

Mirrors penningcool._kernel_py operation for operation (same splitmix64
stream, same arithmetic order) so both produce bit-identical trajectories.
Keep them in sync.
"""

from libc.math cimport sin, cos, exp, log, sqrt, isfinite, M_PI

COMPILED = True

cdef extern from *:
    """
    static const unsigned long long SM_GAMMA = 0x9E3779B97F4A7C15ULL;
    static const unsigned long long SM_M1 = 0xBF58476D1CE4E5B9ULL;
    static const unsigned long long SM_M2 = 0x94D049BB133111EBULL;
    """
    const unsigned long long SM_GAMMA
    const unsigned long long SM_M1
    const unsigned long long SM_M2

cdef double U53 = 1.0 / 9007199254740992.0  # 2^-53


cdef inline double _uniform(unsigned long long *s) noexcept nogil:
    cdef unsigned long long z
    s[0] = s[0] + SM_GAMMA
    z = s[0]
    z = (z ^ (z >> 30)) * SM_M1
    z = (z ^ (z >> 27)) * SM_M2
    z = z ^ (z >> 31)
    return <double>((z >> 11) + 1) * U53


def simulate_core(double x, double y, double vx, double vy, double t0,
                  long n_steps, double dt,
                  double omega_c, double half_wz_sq,
                  double drive_amp, double drive_freq, double drive_phase,
                  int has_laser, double flux_peak, double y_center,
                  double two_over_wsq, double hg, double delta,
                  double k_laser, double recoil,
                  double x_shift, unsigned long long seed, long stride,
                  double omega_plus, double omega_minus,
                  double inv_four_w1sq, double r_max_sq,
                  double[:, ::1] a_tab, double[::1] b_tab, double[::1] c_tab,
                  double[::1] out_t, double[::1] out_rp2,
                  double[::1] out_rm2, double[::1] out_ph):
    """Integrate n_steps steps, recording every `stride` steps.

    Returns (n_recorded, diverged, total_photons, x, y, vx, vy, t).
    """
    cdef unsigned long long s = seed
    cdef double a[12][12]
    cdef double b[12]
    cdef double c[12]
    cdef double kx[12]
    cdef double ky[12]
    cdef double kvx[12]
    cdef double kvy[12]
    cdef int i, j, st
    cdef long step, n_rec
    cdef long n, m
    cdef long photons_window = 0, photons_total = 0
    cdef bint diverged = False, over = False
    cdef double t = t0
    cdef double xt, yt, vxt, vyt, tt, d, w
    cdef double ax_, ay_, avx, avy
    cdef double xs, rp2, rm2, pa, pb, ma, mb
    cdef double dy_, flux, dop, rate, mean, limit, p
    cdef double u0, u1, u2, u3, r1, r2, g1, g2, g3, norm
    cdef double sum_ux, sum_uy

    for i in range(12):
        b[i] = b_tab[i]
        c[i] = c_tab[i]
        for j in range(12):
            a[i][j] = a_tab[i, j]

    xs = x - x_shift
    pa = omega_minus * xs + vy
    pb = omega_minus * y - vx
    rp2 = (pa * pa + pb * pb) * inv_four_w1sq
    ma = omega_plus * xs + vy
    mb = omega_plus * y - vx
    rm2 = (ma * ma + mb * mb) * inv_four_w1sq
    out_t[0] = t
    out_rp2[0] = rp2
    out_rm2[0] = rm2
    out_ph[0] = 0.0
    n_rec = 1

    for step in range(1, n_steps + 1):
        # --- RK8 drift step ---
        for st in range(12):
            if st == 0:
                xt = x
                yt = y
                vxt = vx
                vyt = vy
                tt = t
            else:
                ax_ = 0.0
                ay_ = 0.0
                avx = 0.0
                avy = 0.0
                for j in range(st):
                    w = a[st][j]
                    ax_ += w * kx[j]
                    ay_ += w * ky[j]
                    avx += w * kvx[j]
                    avy += w * kvy[j]
                xt = x + dt * ax_
                yt = y + dt * ay_
                vxt = vx + dt * avx
                vyt = vy + dt * avy
                tt = t + c[st] * dt
            d = drive_amp * sin(drive_freq * tt + drive_phase)
            kx[st] = vxt
            ky[st] = vyt
            kvx[st] = omega_c * vyt + half_wz_sq * xt + d * xt
            kvy[st] = -omega_c * vxt + half_wz_sq * yt - d * yt

        ax_ = 0.0
        ay_ = 0.0
        avx = 0.0
        avy = 0.0
        for j in range(12):
            w = b[j]
            ax_ += w * kx[j]
            ay_ += w * ky[j]
            avx += w * kvx[j]
            avy += w * kvy[j]
        x += dt * ax_
        y += dt * ay_
        vx += dt * avx
        vy += dt * avy
        t = t0 + step * dt

        # --- stochastic photon recoil ---
        if has_laser:
            dy_ = y - y_center
            flux = flux_peak * exp(-dy_ * dy_ * two_over_wsq)
            dop = delta + vx * k_laser
            rate = flux * hg * hg / (hg * hg + flux * hg + dop * dop)
            mean = rate * dt
            n = 0
            if mean > 0.0:
                limit = exp(-mean)
                p = 1.0
                while True:
                    p *= _uniform(&s)
                    if p <= limit:
                        break
                    n += 1
            if n > 0:
                sum_ux = 0.0
                sum_uy = 0.0
                for m in range(n):
                    while True:
                        u0 = _uniform(&s)
                        u1 = _uniform(&s)
                        u2 = _uniform(&s)
                        u3 = _uniform(&s)
                        r1 = sqrt(-2.0 * log(u0))
                        g1 = r1 * cos(2.0 * M_PI * u1)
                        g2 = r1 * sin(2.0 * M_PI * u1)
                        r2 = sqrt(-2.0 * log(u2))
                        g3 = r2 * cos(2.0 * M_PI * u3)
                        norm = sqrt(g1 * g1 + g2 * g2 + g3 * g3)
                        if norm > 0.0:
                            break
                    sum_ux += g1 / norm
                    sum_uy += g2 / norm
                vx += recoil * (n + sum_ux)
                vy += recoil * sum_uy
                photons_window += n
                photons_total += n

        if not (isfinite(x) and isfinite(y) and isfinite(vx) and isfinite(vy)):
            diverged = True
            break

        if step % stride == 0:
            xs = x - x_shift
            pa = omega_minus * xs + vy
            pb = omega_minus * y - vx
            rp2 = (pa * pa + pb * pb) * inv_four_w1sq
            ma = omega_plus * xs + vy
            mb = omega_plus * y - vx
            rm2 = (ma * ma + mb * mb) * inv_four_w1sq
            out_t[n_rec] = t
            out_rp2[n_rec] = rp2
            out_rm2[n_rec] = rm2
            out_ph[n_rec] = photons_window
            n_rec += 1
            photons_window = 0
            if rp2 > r_max_sq or rm2 > r_max_sq:
                diverged = True
                break

    return n_rec, diverged, photons_total, x, y, vx, vy, t
