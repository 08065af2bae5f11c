#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace sthp {

inline constexpr int max_space_degree = 9;
inline constexpr int max_refinement_level = 40;

enum class BoundaryKind { dirichlet, neumann };

/// Axis-aligned cell of a dyadic refinement of a structured coarse grid.
/// In direction i the cell covers [a_i, a_i + 1] * H_i * 2^-l_i.
struct Cell {
  std::array<int, 2> level{0, 0};
  std::array<std::int64_t, 2> index{0, 0};
  std::array<int, 2> degree{1, 1};
};

/// Face normal to direction dir. cell[0] lies below/left, cell[1] above/right;
/// -1 marks the outside of the domain. The normal n_F = +e_dir points from
/// cell[0] into cell[1].
struct Face {
  int dir = 0;
  std::array<int, 2> cell{-1, -1};
  double position = 0.0;  ///< coordinate x_dir of the face line
  double s0 = 0.0, s1 = 0.0; ///< tangential extent
  int side = -1; ///< boundary side 0:x=x0 1:x=x1 2:y=y0 3:y=y1, -1 if interior

  bool is_boundary() const { return cell[0] < 0 || cell[1] < 0; }
  double length() const { return s1 - s0; }
};

struct Domain {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
};

class Mesh {
public:
  using Key = std::array<std::int64_t, 4>; // l1, a1, l2, a2

  Mesh(int nx, int ny, Domain domain = {});
  Mesh(int nx, int ny, Domain domain, std::vector<Cell> cells);

  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<Face>& faces() const { return faces_; }
  std::size_t n_cells() const { return cells_.size(); }
  const Domain& domain() const { return domain_; }
  std::array<int, 2> coarse_dims() const { return {nx_, ny_}; }
  std::uint64_t version() const { return version_; }

  double h(std::size_t c, int dir) const;
  double origin(std::size_t c, int dir) const;
  double area(std::size_t c) const { return h(c, 0) * h(c, 1); }
  double total_area() const;
  double aspect_ratio(std::size_t c) const;
  double max_aspect_ratio() const;

  /// Index of the cell containing (x, y), or -1.
  int locate(double x, double y) const;

  BoundaryKind boundary_kind(int side) const { return boundary_[side]; }
  void set_boundary_kind(int side, BoundaryKind kind) { boundary_[side] = kind; }

  void set_degree(std::size_t c, std::array<int, 2> p);

  /// Bisects each listed (cell, dir), then restores 1-irregularity by
  /// refining the coarser cell across every violating face.
  void refine(const std::vector<std::pair<int, int>>& marks);

  /// Merges sibling pairs that are both marked in the same direction.
  /// Merges that would break 1-irregularity are undone. Returns the number
  /// of merges kept.
  int coarsen(const std::vector<std::pair<int, int>>& marks);

  /// Per-direction level difference <= 1 across every interior face.
  bool is_one_irregular() const;

  Key key(std::size_t c) const { return key_of(cells_[c]); }
  static Key key_of(const Cell& cell) {
    return {cell.level[0], cell.index[0], cell.level[1], cell.index[1]};
  }
  int find(const Key& k) const;

  /// Number of cells per direction of the coarse grid, as given.
  int coarse_cells(int dir) const { return dir == 0 ? nx_ : ny_; }

private:
  void rebuild();
  void build_faces();
  std::vector<std::pair<int, int>> irregular_faces() const;
  std::int64_t fine_begin(const Cell& c, int dir) const;
  std::int64_t fine_end(const Cell& c, int dir) const;
  double coord(std::int64_t fine, int dir) const;

  int nx_, ny_;
  Domain domain_;
  std::array<BoundaryKind, 4> boundary_{BoundaryKind::dirichlet, BoundaryKind::dirichlet,
                                        BoundaryKind::dirichlet, BoundaryKind::dirichlet};
  std::vector<Cell> cells_;
  std::vector<Face> faces_;
  std::map<Key, int> lookup_;
  std::uint64_t version_ = 0;
};

} // namespace sthp
