"""Normalization conventions shared by every module in this package.

Differential-form conventions differ between textbooks by combinatorial
factors; all identities implemented here assume the following fixed choices,
and mixing them with another source's formulas will silently change residuals.

Wedge product of two 1-forms (the "1/2 alternation" convention):

    (a ^ b)(X, Y) = (a(X) b(Y) - a(Y) b(X)) / 2

Exterior derivative of a 1-form (matching the wedge above):

    d a(X, Y) = (X a(Y) - Y a(X) - a([X, Y])) / 2

so in coordinates (d a)_ij = (d_i a_j - d_j a_i) / 2.

Wedge of a 1-form with a 2-form, and d of a 2-form, carry 1/3:

    (a ^ B)(X, Y, Z) = (a(X) B(Y, Z) + a(Y) B(Z, X) + a(Z) B(X, Y)) / 3
    d B(X, Y, Z)     = (d_1 B_23 - d_2 B_13 + d_3 B_12) / 3   (coefficient)

Under these choices the graded Leibniz rule d(a ^ b) = da ^ b - a ^ db
holds with no extra factor.

Cross product: defined through the *unnormalized* volume form
dv(d1, d2, d3) = sqrt(det g), so for the flat metric d1 x d2 = d3.

Coordinates are named x1, x2, x3 in user-facing text and indexed 0..2
internally.

Residual norms in reports: scalars by absolute value, geometric vectors by
g-norm, covector components by Euclidean norm, operator (endomorphism)
equations by spectral norm, 2-forms by max-abs over the three independent
components, 3-forms by the absolute dx1^dx2^dx3 coefficient.
"""

# One-line banner echoed in every JSON report so a reader can tell which
# normalization produced the numbers.
CONVENTION_BANNER = (
    "wedge/d half-normalization: (a^b)(X,Y) = (a(X)b(Y) - a(Y)b(X))/2, "
    "da(X,Y) = (X a(Y) - Y a(X) - a([X,Y]))/2, 1/3 on degree (1,2); "
    "volume form unnormalized: dv(d1,d2,d3) = sqrt(det g)"
)

SCHEMA_VERSION = 1
