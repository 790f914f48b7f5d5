"""Exact arithmetic toolkit for Koecher-Maass series of half-integral weight lifts.

Everything is computed over Q (or Q(sqrt p) locally): no floating point
anywhere.  Submodules:

  exactalg  -- rationals, Q(sqrt p) scalars, Laurent/truncated power series,
               Dirichlet coefficient arithmetic
  padic     -- half-integral symmetric matrices over Z_p: invariants,
               canonical forms, class enumeration
  density   -- local representation / automorphism densities
  siegel    -- local Siegel series data and the Koecher-Maass type power
               series (class sums and closed forms)
  lattice   -- positive definite class enumeration, automorphism counts,
               genera and masses
  modforms  -- exact q-expansions (elliptic, Jacobi, half-integral weight)
  pipeline  -- assembly and verification of the global identities
"""

__version__ = "0.1.0"
