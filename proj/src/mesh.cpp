#include "sthp/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <stdexcept>

namespace sthp {

namespace {

std::uint64_t next_version() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

struct Segment {
  std::int64_t begin, end;
  int cell;
};

Cell child(const Cell& parent, int dir, int which) {
  Cell c = parent;
  c.level[dir] += 1;
  c.index[dir] = 2 * parent.index[dir] + which;
  return c;
}

} // namespace

Mesh::Mesh(int nx, int ny, Domain domain) : nx_(nx), ny_(ny), domain_(domain) {
  if (nx < 1 || ny < 1)
    throw std::invalid_argument("Mesh: coarse grid needs at least one cell");
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      Cell c;
      c.index = {i, j};
      cells_.push_back(c);
    }
  rebuild();
}

Mesh::Mesh(int nx, int ny, Domain domain, std::vector<Cell> cells)
    : nx_(nx), ny_(ny), domain_(domain), cells_(std::move(cells)) {
  rebuild();
  double covered = 0.0;
  for (std::size_t c = 0; c < cells_.size(); ++c)
    covered += area(c);
  const double full = (domain_.x1 - domain_.x0) * (domain_.y1 - domain_.y0);
  if (std::abs(covered - full) > 1e-12 * full || !is_one_irregular())
    throw std::invalid_argument("Mesh: cells do not form a valid 1-irregular tiling");
}

std::int64_t Mesh::fine_begin(const Cell& c, int dir) const {
  return c.index[dir] << (max_refinement_level - c.level[dir]);
}

std::int64_t Mesh::fine_end(const Cell& c, int dir) const {
  return (c.index[dir] + 1) << (max_refinement_level - c.level[dir]);
}

double Mesh::coord(std::int64_t fine, int dir) const {
  const double n = dir == 0 ? nx_ : ny_;
  const double lo = dir == 0 ? domain_.x0 : domain_.y0;
  const double hi = dir == 0 ? domain_.x1 : domain_.y1;
  return lo + (hi - lo) * (static_cast<double>(fine) /
                           std::ldexp(n, max_refinement_level));
}

double Mesh::h(std::size_t c, int dir) const {
  const double len = dir == 0 ? domain_.x1 - domain_.x0 : domain_.y1 - domain_.y0;
  const int n = dir == 0 ? nx_ : ny_;
  return std::ldexp(len / n, -cells_[c].level[dir]);
}

double Mesh::origin(std::size_t c, int dir) const {
  return coord(fine_begin(cells_[c], dir), dir);
}

double Mesh::total_area() const {
  double s = 0.0;
  for (std::size_t c = 0; c < cells_.size(); ++c)
    s += area(c);
  return s;
}

double Mesh::aspect_ratio(std::size_t c) const {
  const double a = h(c, 0), b = h(c, 1);
  return std::max(a, b) / std::min(a, b);
}

double Mesh::max_aspect_ratio() const {
  double r = 1.0;
  for (std::size_t c = 0; c < cells_.size(); ++c)
    r = std::max(r, aspect_ratio(c));
  return r;
}

int Mesh::locate(double x, double y) const {
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const double ox = origin(c, 0), oy = origin(c, 1);
    if (x >= ox && x <= ox + h(c, 0) && y >= oy && y <= oy + h(c, 1))
      return static_cast<int>(c);
  }
  return -1;
}

int Mesh::find(const Key& k) const {
  auto it = lookup_.find(k);
  return it == lookup_.end() ? -1 : it->second;
}

void Mesh::set_degree(std::size_t c, std::array<int, 2> p) {
  for (int p_i : p)
    if (p_i < 0 || p_i > max_space_degree + 1)
      throw std::invalid_argument("Mesh::set_degree: degree out of range");
  cells_.at(c).degree = p;
  version_ = next_version();
}

void Mesh::rebuild() {
  lookup_.clear();
  for (std::size_t c = 0; c < cells_.size(); ++c)
    lookup_[key_of(cells_[c])] = static_cast<int>(c);
  build_faces();
  version_ = next_version();
}

void Mesh::build_faces() {
  faces_.clear();
  for (int dir = 0; dir < 2; ++dir) {
    const int t = 1 - dir;
    const std::int64_t extent =
        static_cast<std::int64_t>(dir == 0 ? nx_ : ny_) << max_refinement_level;
    // line position -> (cells on the low side, cells on the high side)
    std::map<std::int64_t, std::array<std::vector<Segment>, 2>> lines;
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      const Cell& cell = cells_[c];
      const Segment seg{fine_begin(cell, t), fine_end(cell, t), static_cast<int>(c)};
      lines[fine_end(cell, dir)][0].push_back(seg);
      lines[fine_begin(cell, dir)][1].push_back(seg);
    }
    for (auto& [pos, sides] : lines) {
      for (auto& list : sides)
        std::sort(list.begin(), list.end(),
                  [](const Segment& a, const Segment& b) { return a.begin < b.begin; });
      const double x = coord(pos, dir);
      if (pos == 0 || pos == extent) {
        const int s = pos == 0 ? 1 : 0;
        for (const auto& seg : sides[s]) {
          Face f;
          f.dir = dir;
          f.cell[s] = seg.cell;
          f.position = x;
          f.s0 = coord(seg.begin, t);
          f.s1 = coord(seg.end, t);
          f.side = 2 * dir + (pos == 0 ? 0 : 1);
          faces_.push_back(f);
        }
        continue;
      }
      const auto& lo = sides[0];
      const auto& hi = sides[1];
      std::size_t i = 0, j = 0;
      while (i < lo.size() && j < hi.size()) {
        const std::int64_t b = std::max(lo[i].begin, hi[j].begin);
        const std::int64_t e = std::min(lo[i].end, hi[j].end);
        if (b < e) {
          Face f;
          f.dir = dir;
          f.cell = {lo[i].cell, hi[j].cell};
          f.position = x;
          f.s0 = coord(b, t);
          f.s1 = coord(e, t);
          faces_.push_back(f);
        }
        if (lo[i].end < hi[j].end)
          ++i;
        else if (hi[j].end < lo[i].end)
          ++j;
        else {
          ++i;
          ++j;
        }
      }
    }
  }
}

std::vector<std::pair<int, int>> Mesh::irregular_faces() const {
  std::set<std::pair<int, int>> out;
  for (const auto& f : faces_) {
    if (f.is_boundary())
      continue;
    const Cell& a = cells_[f.cell[0]];
    const Cell& b = cells_[f.cell[1]];
    for (int i = 0; i < 2; ++i) {
      if (a.level[i] - b.level[i] > 1)
        out.insert({f.cell[1], i});
      else if (b.level[i] - a.level[i] > 1)
        out.insert({f.cell[0], i});
    }
  }
  return {out.begin(), out.end()};
}

bool Mesh::is_one_irregular() const { return irregular_faces().empty(); }

void Mesh::refine(const std::vector<std::pair<int, int>>& marks) {
  std::vector<std::pair<int, int>> pending = marks;
  while (!pending.empty()) {
    std::vector<std::array<bool, 2>> split(cells_.size(), {false, false});
    for (auto [c, dir] : pending)
      if (cells_.at(static_cast<std::size_t>(c)).level[dir] < max_refinement_level)
        split[c][dir] = true;
    std::vector<Cell> next;
    next.reserve(cells_.size() + pending.size() * 3);
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      std::vector<Cell> parts{cells_[c]};
      for (int dir = 0; dir < 2; ++dir) {
        if (!split[c][dir])
          continue;
        std::vector<Cell> halves;
        for (const auto& p : parts) {
          halves.push_back(child(p, dir, 0));
          halves.push_back(child(p, dir, 1));
        }
        parts = std::move(halves);
      }
      next.insert(next.end(), parts.begin(), parts.end());
    }
    cells_ = std::move(next);
    rebuild();
    pending = irregular_faces();
  }
}

int Mesh::coarsen(const std::vector<std::pair<int, int>>& marks) {
  std::set<std::pair<Key, int>> marked;
  for (auto [c, dir] : marks)
    marked.insert({key(static_cast<std::size_t>(c)), dir});

  std::vector<bool> used(cells_.size(), false);
  std::vector<int> role(cells_.size(), 0); // 1: replaced by parent, 2: dropped
  std::vector<Cell> parent_of(cells_.size());
  std::map<Key, std::pair<Cell, Cell>> merged;
  for (auto [c, dir] : marks) {
    const Cell& a = cells_.at(static_cast<std::size_t>(c));
    if (used[c] || a.level[dir] == 0)
      continue;
    Key sk = key_of(a);
    sk[2 * dir + 1] ^= 1;
    const int s = find(sk);
    if (s < 0 || used[s] || !marked.count({sk, dir}))
      continue;
    const int first = (a.index[dir] % 2 == 0) ? c : s;
    const int second = first == c ? s : c;
    used[first] = used[second] = true;
    role[first] = 1;
    role[second] = 2;
    Cell parent = cells_[first];
    parent.level[dir] -= 1;
    parent.index[dir] /= 2;
    for (int i = 0; i < 2; ++i)
      parent.degree[i] = std::max(cells_[first].degree[i], cells_[second].degree[i]);
    parent_of[first] = parent;
    merged[key_of(parent)] = {cells_[first], cells_[second]};
  }
  if (merged.empty())
    return 0;

  std::vector<Cell> next;
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    if (role[c] == 1)
      next.push_back(parent_of[c]);
    else if (role[c] == 0)
      next.push_back(cells_[c]);
  }
  cells_ = std::move(next);
  rebuild();

  // Undo merges that violate 1-irregularity until the mesh is valid again.
  for (;;) {
    const auto bad = irregular_faces();
    if (bad.empty())
      break;
    std::set<Key> undo;
    for (const auto& f : faces_) {
      if (f.is_boundary())
        continue;
      const Cell& a = cells_[f.cell[0]];
      const Cell& b = cells_[f.cell[1]];
      bool violates = false;
      for (int i = 0; i < 2; ++i)
        violates = violates || std::abs(a.level[i] - b.level[i]) > 1;
      if (!violates)
        continue;
      for (const Cell* cell : {&a, &b})
        if (merged.count(key_of(*cell)))
          undo.insert(key_of(*cell));
    }
    if (undo.empty())
      throw std::logic_error("Mesh::coarsen: irregularity not caused by a merge");
    std::vector<Cell> restored;
    for (const auto& cell : cells_) {
      const Key k = key_of(cell);
      if (undo.count(k)) {
        const auto& kids = merged.at(k);
        restored.push_back(kids.first);
        restored.push_back(kids.second);
        merged.erase(k);
      } else {
        restored.push_back(cell);
      }
    }
    cells_ = std::move(restored);
    rebuild();
  }
  return static_cast<int>(merged.size());
}

} // namespace sthp
