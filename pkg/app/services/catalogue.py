"""
Explain texts for every named check.

Each entry states the formula the check evaluates. The text is part of the
versioned output, so edits here change `explain` output for a release.
"""
from .errors import ConfigError

CHECKS: dict[str, tuple[str, str]] = {
    "clifford-relations": (
        "algebra",
        "gamma_i gamma_j + gamma_j gamma_i = -2 delta_ij Id, gamma_i^H = -gamma_i.\n"
        "even n: eps = i^(n/2) gamma_1...gamma_n with eps^2 = Id, eps^H = eps, eps gamma_i = -gamma_i eps.\n"
        "odd n: eps = i^((n+1)/2) gamma_1...gamma_n with eps^2 = Id and eps gamma_i = gamma_i eps.\n"
        "Value: largest entrywise defect over n = 2..6.",
    ),
    "omega-matrix": (
        "algebra",
        "omega_X = epsbar cbar(X) (odd n: i cbar(X)) acting on spinor tuples.\n"
        "omega_X^H = omega_X, omega_X^2 = |X|^2 Id, omega_(aX+bY) = a omega_X + b omega_Y.",
    ),
    "chi-anticommute": (
        "algebra",
        "chi = (eps (x) epsbar)(c(nu) (x) cbar(N)) and the boundary Dirac operator\n"
        "D^b = sum_j c(e_j) c(nu) (nabla^b_j) anticommute: D^b chi + chi D^b = 0,\n"
        "for random boundary frames, second fundamental forms and boundary maps dN orthogonal to N.",
    ),
    "chi-vanishing": (
        "algebra",
        "For chi sigma = sigma: <eps c(nu) (x) epsbar cbar(Y) sigma, sigma> = 0 for Y orthogonal to N\n"
        "and <eps c(v) (x) epsbar cbar(N) sigma, sigma> = 0 for v tangent.",
    ),
    "a-operator-bound": (
        "algebra",
        "A = 1/2 H + 1/2 sum_j c(nu) c(e_j) (x) cbar(dN(e_j)) cbar(N) satisfies\n"
        "<A sigma, sigma> >= 1/2 (H - ||dN||_tr) |sigma|^2 with ||.||_tr the sum of singular values.",
    ),
    "constraints": (
        "dec",
        "2 mu = R_g + (tr_g q)^2 - |q|_g^2, J = div_g q - d(tr_g q).\n"
        "Value: max difference between finite-difference and closed-form densities; "
        "passes when it reaches the tolerance or converges at the required order.",
    ),
    "dec": (
        "dec",
        "Dominant energy condition mu >= |J|_g. Value: min over interior nodes of mu - |J|_g.",
    ),
    "tilt-dec": (
        "faces",
        "Tilted boundary condition on every face F:\n"
        "H + cos(theta) tr_F q >= sin(theta) |q(nu, .)^T|, cos(theta) = <N0, N_F>.\n"
        "Value: min of the margin over face samples; the failing face and point are recorded.",
    ),
    "null-expansion": (
        "faces",
        "Null expansions H + tr_F q and H - tr_F q of each face (reported only).",
    ),
    "matching-angle": (
        "faces",
        "Matching angle along edges: g(nu_1, nu_2) = <N_1, N_2>. Value: max |difference| over edge samples.",
    ),
    "smoothing-hausdorff": (
        "smoothing",
        "Smoothed body {sum_l exp(lambda u_l) <= 1}. Value: sampled radial distance between its boundary\n"
        "and the polyhedron's boundary; must decrease strictly along the lambda sweep.",
    ),
    "smoothing-containment": (
        "smoothing",
        "sum_l exp(lambda u_l) <= 1 implies u_l <= 0 for all l. Value: number of sampled counterexamples.",
    ),
    "smoothed-gauss": (
        "smoothing",
        "N_lambda = sum_l exp(lambda u_l) a_l / |sum_l exp(lambda u_l) a_l|.\n"
        "Value: max |N_lambda - N_F| at face centers for the largest lambda.",
    ),
    "sl": (
        "sl",
        "Integrated identity on a box:\n"
        "  int |Dhat sigma|^2 = int |nablahat sigma|^2 + 1/2 int <sigma, mu sigma + P_J sigma>\n"
        "                       + int_bdry <D^b sigma, sigma> + int_bdry <A sigma, sigma>\n"
        "                       + 1/2 int_bdry <P_(tr q nu - q(nu)) sigma, sigma>,\n"
        "nablahat_i = nabla_i + 1/2 P_(q(e_i)), P_v = eps c(v) (x) omega_N0, Dhat = D + Psi.\n"
        "Value: relative residual at the finest resolution; order log2(r(h)/r(h/2)).",
    ),
    "sl-inequality": (
        "sl",
        "With chi sigma = sigma on the boundary:\n"
        "  int |Dhat sigma|^2 >= int |nablahat sigma|^2 + 1/2 int <sigma, mu sigma + P_J sigma>\n"
        "    + 1/2 int_bdry (H + cos(theta) tr q - sin(theta) |q(nu)^T| - ||dN||_tr) |sigma|^2.\n"
        "Value: min over random boundary-projected sections of the margin plus its quadrature tolerance.",
    ),
    "transport-oracle": (
        "transport",
        "Flat g, constant q: vec S(t) = expm(t L) vec S(0), L = -1/2 eps c(q x') (x) omega_N0.\n"
        "Value: max entrywise difference of the Runge-Kutta trajectory.",
    ),
    "transport-conservation": (
        "transport",
        "Along solutions of nabla_i s + 1/2 eps q(e_i) omega_N0 s = 0 the quantities\n"
        "f^2 - |W|^2, <psi_+, psi_->, |z|^2 - |Z|^2 are constant (f = |psi|^2, W^j = <eps e_j psi, psi>).\n"
        "Value: max drift at the finest step; order over the step ladder.",
    ),
    "cauchy-schwarz": (
        "transport",
        "|W| <= f along every transported state. Value: max(|W| - f).",
    ),
    "alignment": (
        "transport",
        "If f = |W| initially then eps W psi = f psi along the curve. Value: max |eps W psi - f psi|.",
    ),
    "w-gradient": (
        "transport",
        "grad f = -q(W, .), nabla_i W = -f q(e_i) and dW = 0 on the closed-form family\n"
        "s(x) = expm((a.x) L) s0 for q = kappa a (x) a. Value: exact-derivative residual.",
    ),
    "capillary": (
        "transport",
        "On a face with eps c(nu) omega_N s = s: <W, nu> = <N, N0> f. Value: max residual over angles 0, pi/3, pi/2.",
    ),
    "rigidity-residuals": (
        "rigidity",
        "With e_n the unit normal of N0 and i, j, k, l tangential:\n"
        "  nabla_i q_jn - nabla_j q_in, Rhat_ijkl, Rhat_ijkn - (nabla_i q_jk - nabla_j q_ik),\n"
        "  Rhat_njkn - (nabla_n q_jk - nabla_j q_nk), mu + J(e_n), Rhat_ijkl - tau_kl + tau_lk,\n"
        "Rhat_ijkl = R_ijkl + q_jk q_il - q_ik q_jl. The opposite-sign mixed residual is reported alongside.",
    ),
    "rigidity-exact": (
        "rigidity",
        "The rigidity residuals evaluated with closed-form jets at the nodes of the coarsest grid.",
    ),
    "boundary-2ff": (
        "rigidity",
        "h_ik + cos(theta) q_ik = q(e_i, nu) <xi, e_k> on every face, xi the unit normal of N0.",
    ),
    "boundary-geodesic": (
        "rigidity",
        "The face meets each leaf orthogonal to xi in a totally geodesic hypersurface of the leaf\n"
        "(faces with theta = 0 or pi excluded).",
    ),
}


def check_names() -> list[str]:
    return sorted(CHECKS)


def explain(name: str) -> str:
    """
    Formula text of a check.

    Raises:
        ConfigError: For an unknown name; the message lists the valid names
    """
    if name not in CHECKS:
        raise ConfigError(f"unknown check {name!r}; valid names: {', '.join(check_names())}")
    suite, text = CHECKS[name]
    return f"{name} [{suite}]\n{text}"
