#!/usr/bin/env python3
"""Generate closed-form manufactured source terms for the built-in problems.

Writes core/src/pde_sources.cpp. The expressions are derived from the
manufactured exact solutions; a finite-difference self-check runs before
anything is written.
"""

import sympy as sp


def cse_ccode(exprs, names, args):
    reps, outs = sp.cse(exprs, optimizations="basic")
    lines = []
    for sym, val in reps:
        lines.append(f"    const double {sym} = {sp.ccode(val)};")
    for name, out in zip(names, outs):
        lines.append(f"    {name} = {sp.ccode(out)};")
    body = "\n".join(lines)
    return body


def derive_lshape():
    r, th = sp.symbols("r th", positive=True)
    x1 = r * sp.cos(th)
    x2 = r * sp.sin(th)

    R = r * (r - 1) * (r - 2)
    S = sp.sin(sp.Rational(2, 3) * th - sp.pi / 3)
    u = R * S

    # cartesian derivatives through the polar chain rule
    def dx(f):
        return sp.cos(th) * sp.diff(f, r) - sp.sin(th) / r * sp.diff(f, th)

    def dy(f):
        return sp.sin(th) * sp.diff(f, r) + sp.cos(th) / r * sp.diff(f, th)

    A11 = -((x1 + x2) ** 2) + 16
    A12 = x1**2 - x2**2
    A21 = -(x1**2) + x2**2
    A22 = -((x1 - x2) ** 2) + 16

    ux = dx(u)
    uy = dy(u)
    q1 = A11 * ux + A12 * uy
    q2 = A21 * ux + A22 * uy
    div_flux = sp.simplify(dx(q1) + dy(q2))

    b_default = (sp.expand((x1 - x2) ** 3), sp.expand((x1 + x2) ** 3))
    b_literal = (sp.Integer(0), sp.expand((x1 + x2) ** 3))

    c_default = sp.simplify(div_flux - (b_default[0] * ux + b_default[1] * uy))
    c_literal = sp.simplify(div_flux - (b_literal[0] * ux + b_literal[1] * uy))

    return u, ux, uy, c_default, c_literal, (r, th)


def derive_nacd():
    x1, x2, t = sp.symbols("x1 x2 t")
    u = sp.cos(sp.pi * x1) * sp.cos(sp.pi * x2) * sp.exp(-sp.pi * t * (x1 + x2))

    uu = sp.Symbol("uu")
    A = sp.Matrix([[uu**2 + 1, 2 * uu**2], [-2 * uu**2, uu**2 + 1]])
    B = sp.Matrix([uu**2 + 2 * uu, -2 * uu**2 + uu])

    grad = sp.Matrix([sp.diff(u, x1), sp.diff(u, x2)])
    Au = A.subs(uu, u)
    Bu = B.subs(uu, u)
    flux = Au * grad - Bu
    div_flux = sp.diff(flux[0], x1) + sp.diff(flux[1], x2)
    c = sp.simplify(-(sp.diff(u, t)) + div_flux)
    return u, c, (x1, x2, t)


def selfcheck_lshape(u, ux, uy, c_def, c_lit, syms):
    import math
    import random

    r, th = syms
    fu = sp.lambdify(syms, u, "math")
    fux = sp.lambdify(syms, ux, "math")
    fuy = sp.lambdify(syms, uy, "math")
    fcd = sp.lambdify(syms, c_def, "math")
    fcl = sp.lambdify(syms, c_lit, "math")

    def theta(x, y):
        a = math.atan2(y, x)
        if a < math.pi / 2:
            a += 2 * math.pi
        return a

    def val(f, x, y):
        return f(math.hypot(x, y), theta(x, y))

    rng = random.Random(7)
    h = 1e-5
    for _ in range(40):
        # third quadrant portion of the L, safely away from boundaries
        x = rng.uniform(-1.8, -0.2)
        y = rng.uniform(-1.8, -0.2)

        gx = (val(fu, x + h, y) - val(fu, x - h, y)) / (2 * h)
        gy = (val(fu, x, y + h) - val(fu, x, y - h)) / (2 * h)
        assert abs(gx - val(fux, x, y)) < 1e-6, (gx, val(fux, x, y))
        assert abs(gy - val(fuy, x, y)) < 1e-6

        for which, fc in (("def", fcd), ("lit", fcl)):
            def flux(xx, yy, comp):
                a11 = -((xx + yy) ** 2) + 16
                a12 = xx**2 - yy**2
                a21 = -(xx**2) + yy**2
                a22 = -((xx - yy) ** 2) + 16
                uxv, uyv = val(fux, xx, yy), val(fuy, xx, yy)
                return (a11 * uxv + a12 * uyv) if comp == 0 else (a21 * uxv + a22 * uyv)

            div = (flux(x + h, y, 0) - flux(x - h, y, 0)) / (2 * h) + (
                flux(x, y + h, 1) - flux(x, y - h, 1)
            ) / (2 * h)
            b1 = 0.0 if which == "lit" else (x - y) ** 3
            b2 = (x + y) ** 3
            resid = -div + b1 * val(fux, x, y) + b2 * val(fuy, x, y) + val(fc, x, y)
            assert abs(resid) < 2e-4, (which, resid)
    print("lshape self-check ok")


def selfcheck_nacd(u, c, syms):
    import math
    import random

    fu = sp.lambdify(syms, u, "math")
    fc = sp.lambdify(syms, c, "math")
    rng = random.Random(11)
    h = 1e-5
    for _ in range(40):
        x = rng.uniform(-0.8, 0.8)
        y = rng.uniform(-0.8, 0.8)
        t = rng.uniform(0.05, 0.95)

        def flux(xx, yy, comp):
            uv = fu(xx, yy, t)
            gx = (fu(xx + h, yy, t) - fu(xx - h, yy, t)) / (2 * h)
            gy = (fu(xx, yy + h, t) - fu(xx, yy - h, t)) / (2 * h)
            a11, a12 = uv**2 + 1, 2 * uv**2
            a21, a22 = -2 * uv**2, uv**2 + 1
            b = (uv**2 + 2 * uv, -2 * uv**2 + uv)
            return (a11 * gx + a12 * gy - b[0]) if comp == 0 else (a21 * gx + a22 * gy - b[1])

        div = (flux(x + h, y, 0) - flux(x - h, y, 0)) / (2 * h) + (
            flux(x, y + h, 1) - flux(x, y - h, 1)
        ) / (2 * h)
        ut = (fu(x, y, t + h) - fu(x, y, t - h)) / (2 * h)
        resid = ut - div + fc(x, y, t)
        assert abs(resid) < 2e-3, resid  # nested second-order FD noise
    print("nacd self-check ok")


def main():
    u, ux, uy, c_def, c_lit, syms = derive_lshape()
    selfcheck_lshape(u, ux, uy, c_def, c_lit, syms)
    un, cn, symsn = derive_nacd()
    selfcheck_nacd(un, cn, symsn)

    out = []
    out.append("// Generated by scripts/derive_sources.py; do not edit by hand.")
    out.append("// Manufactured-solution source terms and exact gradients.")
    out.append("")
    out.append("#include \"pfnn2/pde_sources.hpp\"")
    out.append("")
    out.append("#include <cmath>")
    out.append("")
    out.append("namespace pfnn2::gen {")
    out.append("")
    out.append("namespace {")
    out.append("constexpr double kHalfPi = 1.5707963267948966;")
    out.append("constexpr double kTwoPi = 6.283185307179586;")
    out.append("}  // namespace")
    out.append("")
    out.append("// Polar angle on the branch used by the L-shaped domain: [pi/2, 2 pi].")
    out.append("double lshape_theta(double x1, double x2) {")
    out.append("    double th = std::atan2(x2, x1);")
    out.append("    if (th < kHalfPi) th += kTwoPi;")
    out.append("    return th;")
    out.append("}")
    out.append("")

    body = cse_ccode([u], ["out"], syms)
    out.append("double lshape_exact_polar(double r, double th) {")
    out.append("    double out;")
    out.append(body)
    out.append("    return out;")
    out.append("}")
    out.append("")

    body = cse_ccode([ux, uy], ["gx", "gy"], syms)
    out.append("void lshape_exact_grad_polar(double r, double th, double* outx, double* outy) {")
    out.append("    double gx, gy;")
    out.append(body)
    out.append("    *outx = gx;")
    out.append("    *outy = gy;")
    out.append("}")
    out.append("")

    body = cse_ccode([c_def], ["out"], syms)
    out.append("double lshape_source_polar(double r, double th) {")
    out.append("    double out;")
    out.append(body)
    out.append("    return out;")
    out.append("}")
    out.append("")

    body = cse_ccode([c_lit], ["out"], syms)
    out.append("double lshape_source_polar_b1zero(double r, double th) {")
    out.append("    double out;")
    out.append(body)
    out.append("    return out;")
    out.append("}")
    out.append("")

    body = cse_ccode([un], ["out"], list(symsn))
    out.append("double nacd_exact(double x1, double x2, double t) {")
    out.append("    double out;")
    out.append(body)
    out.append("    return out;")
    out.append("}")
    out.append("")

    body = cse_ccode([cn], ["out"], list(symsn))
    out.append("double nacd_source(double x1, double x2, double t) {")
    out.append("    double out;")
    out.append(body)
    out.append("    return out;")
    out.append("}")
    out.append("")
    out.append("}  // namespace pfnn2::gen")
    out.append("")

    with open("core/src/pde_sources.cpp", "w") as f:
        f.write("\n".join(out))
    print("wrote core/src/pde_sources.cpp")


if __name__ == "__main__":
    main()
