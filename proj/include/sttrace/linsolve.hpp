#pragma once

#include "sttrace/assembly.hpp"
#include "sttrace/errors.hpp"

namespace sttrace {

/// Fill-reducing ordering used by the sparse direct factorization. Trace
/// systems are consistent but rank-deficient, so different orderings yield
/// different coefficient vectors; the induced surface trace must agree.
enum class SolverOrdering { colamd, amd };

struct SolveOptions {
    /// Accept a solution when |A x - b| <= tol * |b|, measured against the
    /// original, unregularized matrix.
    double tol = 1e-10;
    SolverOrdering ordering = SolverOrdering::colamd;
};

struct SolveReport {
    double residual = 0.0;
    double rhs_norm = 0.0;
    bool regularized = false;
    bool used_fallback = false;
};

/// Solves one slab system. Direct sparse LU first; if the factorization
/// breaks down on the rank-deficient matrix, retries with a small diagonal
/// shift, and falls back to a least-squares Krylov solve if the shifted
/// factorization still misses the residual tolerance.
SlabSolution solve_slab(const SlabSystem& sys, const SolveOptions& opts = {},
                        SolveReport* report = nullptr);

}  // namespace sttrace
