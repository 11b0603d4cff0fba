#include "ghostscope/ghostid.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "ghostscope/error.hpp"

namespace ghostscope {

void validate(const IdConfig& cfg) {
  if (!(cfg.tau > 0.0 && cfg.tau < 1.0)) throw DataError("id.tau must lie in (0, 1)");
  if (!(cfg.delta_r > 0.0)) throw DataError("id.delta_r must be > 0");
  if (!(cfg.delta_theta > 0.0)) throw DataError("id.delta_theta must be > 0");
  if (!(cfg.delta_g1 > 0.0)) throw DataError("id.delta_g1 must be > 0");
}

namespace ghostid {

namespace {

double rng(const Detection& d) { return d.polar.range; }
double ang(const Detection& d) { return d.polar.angle_deg; }

// Total order used for every argmin; entries placed at their own AOA sort
// before their reintegrated twins.
auto sort_key(const Detection& d) {
  const bool twin = std::abs(d.aoa_deg - d.polar.angle_deg) > 1e-9;
  return std::make_tuple(d.polar.range, -d.magnitude, d.polar.angle_deg, twin, d.aoa_deg, d.aod_deg);
}

std::vector<Detection> sorted(const std::vector<Detection>& dets) {
  std::vector<Detection> s = dets;
  std::stable_sort(s.begin(), s.end(),
                   [](const Detection& a, const Detection& b) { return sort_key(a) < sort_key(b); });
  return s;
}

template <class Pred>
std::optional<Detection> first_where(const std::vector<Detection>& s, Pred pred) {
  for (const auto& d : s)
    if (pred(d)) return d;
  return std::nullopt;
}

bool same_entry(const Detection& a, const Detection& b) { return sort_key(a) == sort_key(b); }

Detection pick_human(const std::vector<Detection>& s, const IdConfig& cfg) {
  if (s.empty()) throw DataError("identify: empty detection list");
  double mmax = 0.0;
  for (const auto& d : s) mmax = std::max(mmax, d.magnitude);
  auto h = first_where(s, [&](const Detection& d) { return d.magnitude > cfg.tau * mmax; });
  if (!h) throw DataError("no human candidate");
  return *h;
}

// Steps 3-5 given H and a chosen G1.
void complete(GhostSet& gs, const std::vector<Detection>& s, const IdConfig& cfg) {
  const Detection& g1 = *gs.g1;
  std::optional<Detection> best;
  for (const auto& d : s)
    if (std::abs(rng(d) - rng(g1)) < cfg.delta_r && std::abs(ang(d) - ang(g1)) >= cfg.delta_theta &&
        (!best || d.magnitude > best->magnitude))
      best = d;
  gs.g1p = best;

  gs.g2 = first_where(s, [&](const Detection& d) {
    return std::abs(ang(d) - ang(gs.h)) < cfg.delta_theta && rng(d) > rng(g1);
  });
  if (gs.g1p) {
    const Detection g1p = *gs.g1p;
    gs.g2p = first_where(s, [&](const Detection& d) {
      return rng(d) > rng(g1p) && std::abs(ang(d) - ang(g1p)) < cfg.delta_theta;
    });
  }
}

bool is_g1_candidate(const Detection& d, const Detection& h, const IdConfig& cfg) {
  const double dr = rng(d) - rng(h);
  return std::abs(ang(d) - ang(h)) < cfg.delta_theta && dr > 0.0 && dr < cfg.delta_g1;
}

}  // namespace

GhostSet identify(const std::vector<Detection>& dets, const IdConfig& cfg, std::size_t frame_id) {
  validate(cfg);
  const auto s = sorted(dets);
  GhostSet gs;
  gs.frame_id = frame_id;
  gs.h = pick_human(s, cfg);
  gs.g1 = first_where(s, [&](const Detection& d) { return is_g1_candidate(d, gs.h, cfg); });
  if (gs.g1) complete(gs, s, cfg);
  return gs;
}

std::vector<GhostSet> identify_all(const std::vector<Detection>& dets, const IdConfig& cfg,
                                   std::size_t frame_id) {
  validate(cfg);
  const auto s = sorted(dets);
  const Detection h = pick_human(s, cfg);

  std::vector<GhostSet> out;
  std::vector<Detection> seen_g1;
  for (const auto& d : s) {
    if (!is_g1_candidate(d, h, cfg)) continue;
    const bool dup = std::any_of(seen_g1.begin(), seen_g1.end(), [&](const Detection& o) {
      return std::abs(rng(o) - rng(d)) < cfg.delta_r && std::abs(ang(o) - ang(d)) < cfg.delta_theta;
    });
    if (dup) continue;
    seen_g1.push_back(d);

    GhostSet gs;
    gs.frame_id = frame_id;
    gs.h = h;
    gs.g1 = d;
    complete(gs, s, cfg);
    if (gs.g1p) {
      const bool claimed = std::any_of(out.begin(), out.end(), [&](const GhostSet& o) {
        return o.g1p && same_entry(*o.g1p, *gs.g1p);
      });
      if (claimed) continue;
    }
    out.push_back(gs);
  }
  if (out.empty()) {
    GhostSet gs;
    gs.frame_id = frame_id;
    gs.h = h;
    out.push_back(gs);
  }
  return out;
}

}  // namespace ghostid
}  // namespace ghostscope
