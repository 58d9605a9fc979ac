#ifndef CDIFF_NORMALIZE_HPP
#define CDIFF_NORMALIZE_HPP

#include "cdiff/transform.hpp"
#include "cdiff/upd.hpp"

namespace cdiff {

/// Unit-diffusion normalization X~ = gamma(X), gamma' = 1/sigma_X. Closed
/// forms for OU, CIR and NLDCEV; the numeric pipeline otherwise.
UpdModel lamperti_normalize(const UpdModel& m);

/// Always takes the generic route (quadrature for gamma, root finding for
/// its inverse); exists so the closed forms can be cross-checked.
UpdModel lamperti_normalize_numeric(const UpdModel& m);

/// Natural-scale normalization X~ = S(X): zero drift, diffusion
/// sigma~^2(x) = s^2(S^{-1}(x)) sigma^2(S^{-1}(x)).
UpdModel natural_scale_normalize(const UpdModel& m);

/// Marginal-cdf normalization X~ = F_X(X) onto (0,1).
UpdModel cdf_normalize(const UpdModel& m);

/// Observationally equivalent rewrite of a structure under a one-to-one
/// latent-coordinate change X = T(X~): the model drift/diffusion transform by
/// Ito's lemma and the transformation composes as V~ = V o T.
Structure rewrite_structure(const Structure& s, const SmoothMap& T, Domain new_domain);

}  // namespace cdiff

#endif  // CDIFF_NORMALIZE_HPP
