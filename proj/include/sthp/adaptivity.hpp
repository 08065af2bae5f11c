#pragma once

#include <string>
#include <vector>

#include "sthp/estimator.hpp"
#include "sthp/mesh.hpp"
#include "sthp/time_disc.hpp"

namespace sthp {

struct AdaptConfig {
  double theta_h = 1.0 / 8.0;
  double theta_tau = 1.0 / 8.0;
  double theta_h_co = 1.0 / 25.0;
  double theta_tau_co = 1.0 / 25.0;
  double gamma = 0.5;
  int p_min = 1, p_max = max_space_degree;
  int k_min = 0, k_max = max_time_degree;
  bool even_degrees = false;
  /// Pure h/tau adaptivity: every mark becomes a mesh change.
  bool h_only = false;

  void validate() const;
};

enum class MarkKind { h, p };

struct SpaceMark {
  int cell;
  int dir;
  MarkKind kind;
  double ratio;
};

struct TimeMark {
  int slab;
  MarkKind kind; ///< h = bisect/merge the slab, p = change k
  double ratio;
};

struct MarkSet {
  std::vector<SpaceMark> refine, coarsen;
  std::vector<TimeMark> refine_time, coarsen_time;
};

/// Rounded half up, at least one.
int refine_count(double theta, std::size_t n);
int coarsen_count(double theta, std::size_t n);

/// |high| / |low|, 0 when |low| < 1e-14.
double saturation_ratio(double high, double low);

MarkSet mark_space(const EstimateReport& report, const AdaptConfig& cfg);
MarkSet mark_time(const EstimateReport& report, const AdaptConfig& cfg);
MarkSet mark(const EstimateReport& report, const AdaptConfig& cfg);

struct AdaptSummary {
  int h_refined = 0, p_refined = 0, h_coarsened = 0, p_coarsened = 0;
  int tau_refined = 0, k_refined = 0, tau_coarsened = 0, k_coarsened = 0;
  int clamped = 0;
};

/// Applies p/k changes, then coarsening, then refinement.
AdaptSummary apply_marks(Mesh& mesh, TimeMesh& tm, const MarkSet& marks, const AdaptConfig& cfg);

/// One line per mark, for the audit log.
std::string format_marks(const MarkSet& marks, const Mesh& mesh, int loop);

} // namespace sthp
