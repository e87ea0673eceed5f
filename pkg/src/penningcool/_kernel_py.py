"""Pure-Python trajectory kernel.

Reference implementation of the hot loop: fixed-step 8th-order Runge-Kutta
drift of the radial equations of motion, interleaved with Poissonian photon
scattering and recoil kicks on a uniform time grid.

The compiled Cython kernel (penningcool._kernel) mirrors this code operation
for operation, including the splitmix64 random stream, so the two produce
bit-identical trajectories.  Keep them in sync.
"""

import math

COMPILED = False

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def simulate_core(x, y, vx, vy, t0, n_steps, dt,
                  omega_c, half_wz_sq,
                  drive_amp, drive_freq, drive_phase,
                  has_laser, flux_peak, y_center, two_over_wsq,
                  hg, delta, k_laser, recoil,
                  x_shift, seed, stride,
                  omega_plus, omega_minus, inv_four_w1sq, r_max_sq,
                  a_tab, b_tab, c_tab,
                  out_t, out_rp2, out_rm2, out_ph):
    """Integrate n_steps steps, recording every `stride` steps.

    Returns (n_recorded, diverged, total_photons, x, y, vx, vy, t).
    Output arrays must hold n_steps // stride + 1 entries.
    """
    s = int(seed) & _MASK

    a = [[a_tab[i][j] for j in range(12)] for i in range(12)]
    b = [b_tab[i] for i in range(12)]
    c = [c_tab[i] for i in range(12)]

    kx = [0.0] * 12
    ky = [0.0] * 12
    kvx = [0.0] * 12
    kvy = [0.0] * 12

    t = t0
    n_rec = 0
    diverged = False
    photons_window = 0
    photons_total = 0

    def record(idx):
        xs = x - x_shift
        pa = omega_minus * xs + vy
        pb = omega_minus * y - vx
        rp2 = (pa * pa + pb * pb) * inv_four_w1sq
        ma = omega_plus * xs + vy
        mb = omega_plus * y - vx
        rm2 = (ma * ma + mb * mb) * inv_four_w1sq
        out_t[idx] = t
        out_rp2[idx] = rp2
        out_rm2[idx] = rm2
        out_ph[idx] = photons_window
        return rp2 > r_max_sq or rm2 > r_max_sq

    record(0)
    n_rec = 1

    for step in range(1, n_steps + 1):
        # --- RK8 drift step ---
        for st in range(12):
            if st == 0:
                xt, yt, vxt, vyt = x, y, vx, vy
                tt = t
            else:
                ax_ = 0.0
                ay_ = 0.0
                avx = 0.0
                avy = 0.0
                arow = a[st]
                for j in range(st):
                    w = arow[j]
                    ax_ += w * kx[j]
                    ay_ += w * ky[j]
                    avx += w * kvx[j]
                    avy += w * kvy[j]
                xt = x + dt * ax_
                yt = y + dt * ay_
                vxt = vx + dt * avx
                vyt = vy + dt * avy
                tt = t + c[st] * dt
            d = drive_amp * math.sin(drive_freq * tt + drive_phase)
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
            flux = flux_peak * math.exp(-dy_ * dy_ * two_over_wsq)
            dop = delta + vx * k_laser
            rate = flux * hg * hg / (hg * hg + flux * hg + dop * dop)
            mean = rate * dt
            # Knuth Poisson sampler
            n = 0
            if mean > 0.0:
                limit = math.exp(-mean)
                p = 1.0
                while True:
                    s = (s + _GAMMA) & _MASK
                    z = s
                    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
                    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
                    z ^= z >> 31
                    p *= ((z >> 11) + 1) * 2.0 ** -53
                    if p <= limit:
                        break
                    n += 1
            if n > 0:
                sum_ux = 0.0
                sum_uy = 0.0
                for _ in range(n):
                    while True:
                        u = [0.0] * 4
                        for i in range(4):
                            s = (s + _GAMMA) & _MASK
                            z = s
                            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
                            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
                            z ^= z >> 31
                            u[i] = ((z >> 11) + 1) * 2.0 ** -53
                        r1 = math.sqrt(-2.0 * math.log(u[0]))
                        g1 = r1 * math.cos(2.0 * math.pi * u[1])
                        g2 = r1 * math.sin(2.0 * math.pi * u[1])
                        r2 = math.sqrt(-2.0 * math.log(u[2]))
                        g3 = r2 * math.cos(2.0 * math.pi * u[3])
                        norm = math.sqrt(g1 * g1 + g2 * g2 + g3 * g3)
                        if norm > 0.0:
                            break
                    sum_ux += g1 / norm
                    sum_uy += g2 / norm
                vx += recoil * (n + sum_ux)
                vy += recoil * sum_uy
                photons_window += n
                photons_total += n

        if not (math.isfinite(x) and math.isfinite(y)
                and math.isfinite(vx) and math.isfinite(vy)):
            diverged = True
            break

        if step % stride == 0:
            over = record(n_rec)
            n_rec += 1
            photons_window = 0
            if over:
                diverged = True
                break

    return n_rec, diverged, photons_total, x, y, vx, vy, t
