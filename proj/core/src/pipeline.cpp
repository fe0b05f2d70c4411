/*
 * Copyright 2026 The allnode Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "allnode/pipeline.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace allnode {

std::vector<NzGroup> partition_nonzeros(const CsrGraph& block, const GridConfig& grid, int machine,
                                        std::uint64_t target_entries, IndexRange rows) {
  if (target_entries < 1) throw BoundsError("target_entries must be at least 1");
  if (rows.end > block.rows() || rows.begin > rows.end) throw BoundsError("row range outside the block");
  const int p = grid.coord(machine).p;

  std::vector<std::pair<NodeId, std::uint64_t>> by_col;
  by_col.reserve(block.row_offsets[rows.end] - block.row_offsets[rows.begin]);
  for (std::uint64_t nz = block.row_offsets[rows.begin]; nz < block.row_offsets[rows.end]; ++nz) {
    by_col.emplace_back(block.col_ids[nz], nz);
  }
  std::sort(by_col.begin(), by_col.end());

  std::vector<NzGroup> groups;
  auto open = [&](int owner, NodeId first) {
    NzGroup g;
    g.id = static_cast<int>(groups.size());
    g.machine = machine;
    g.kind = owner == p ? GroupKind::Local : GroupKind::Remote;
    g.row_group = owner;
    g.cols = {first, first};
    groups.push_back(std::move(g));
  };

  std::size_t i = 0;
  while (i < by_col.size()) {
    const NodeId c = by_col[i].first;
    std::size_t j = i;
    while (j < by_col.size() && by_col[j].first == c) ++j;
    const std::uint64_t count = j - i;
    const int owner = owner_row_group(grid, c);
    bool fresh = groups.empty() || groups.back().row_group != owner;
    if (!fresh && owner != p && groups.back().nonzeros.size() + count > target_entries) fresh = true;
    if (fresh) open(owner, c);
    NzGroup& g = groups.back();
    g.cols.end = c + 1;
    g.columns.push_back(c);
    for (std::size_t k = i; k < j; ++k) g.nonzeros.push_back(by_col[k].second);
    i = j;
  }
  for (auto& g : groups) std::sort(g.nonzeros.begin(), g.nonzeros.end());
  return groups;
}

std::vector<NzGroup> partition_nonzeros(const CsrGraph& block, const GridConfig& grid, int machine,
                                        std::uint64_t target_entries) {
  return partition_nonzeros(block, grid, machine, target_entries, {0, block.rows()});
}

std::string_view schedule_name(ScheduleVariant v) {
  switch (v) {
    case ScheduleVariant::Naive: return "naive";
    case ScheduleVariant::PrefetchIds: return "prefetch";
    case ScheduleVariant::LocalFirst: return "local-first";
  }
  return "unknown";
}

ScheduleVariant parse_schedule(std::string_view name) {
  if (name == "naive") return ScheduleVariant::Naive;
  if (name == "prefetch" || name == "prefetch_ids") return ScheduleVariant::PrefetchIds;
  if (name == "local-first" || name == "local_first") return ScheduleVariant::LocalFirst;
  throw ParseError("unknown schedule '" + std::string(name) + "'");
}

void GroupSchedule::validate(std::span<const NzGroup> groups) const {
  const std::size_t n = groups.size();
  std::vector<int> phase(n, 0);
  std::vector<int> id_order;
  std::vector<int> feat_order;
  for (const auto& t : tasks) {
    if (t.group < 0 || static_cast<std::size_t>(t.group) >= n) {
      throw IntegrityError("schedule references unknown group " + std::to_string(t.group));
    }
    int& ph = phase[static_cast<std::size_t>(t.group)];
    const int want = static_cast<int>(t.kind);
    if (ph != want) {
      throw IntegrityError("group " + std::to_string(t.group) + " runs its phases out of order");
    }
    ++ph;
    if (t.kind == TaskKind::IdComm) id_order.push_back(t.group);
    if (t.kind == TaskKind::FeatComm) feat_order.push_back(t.group);
  }
  for (std::size_t g = 0; g < n; ++g) {
    if (phase[g] != 3) throw IntegrityError("group " + std::to_string(g) + " is incomplete");
  }
  if (id_order != feat_order) {
    throw IntegrityError("features must be received in the order their ids were sent");
  }
}

GroupSchedule build_schedule(std::span<const NzGroup> groups, ScheduleVariant variant) {
  GroupSchedule s;
  s.variant = variant;
  std::vector<int> order;
  for (const auto& g : groups) order.push_back(g.id);
  if (variant == ScheduleVariant::Naive) {
    for (int g : order) {
      s.tasks.push_back({TaskKind::IdComm, g});
      s.tasks.push_back({TaskKind::FeatComm, g});
      s.tasks.push_back({TaskKind::Compute, g});
    }
    return s;
  }
  if (variant == ScheduleVariant::LocalFirst) {
    std::stable_partition(order.begin(), order.end(), [&](int g) {
      return groups[static_cast<std::size_t>(g)].kind == GroupKind::Local;
    });
  }
  const std::size_t n = order.size();
  const std::size_t ahead = static_cast<std::size_t>(kPrefetchDepth);
  for (std::size_t i = 0; i < std::min(n, ahead + 1); ++i) s.tasks.push_back({TaskKind::IdComm, order[i]});
  for (std::size_t i = 0; i < n; ++i) {
    s.tasks.push_back({TaskKind::FeatComm, order[i]});
    s.tasks.push_back({TaskKind::Compute, order[i]});
    if (i + ahead + 1 < n) s.tasks.push_back({TaskKind::IdComm, order[i + ahead + 1]});
  }
  return s;
}

template <typename T>
RowAccumulator<T>::RowAccumulator(std::size_t rows, std::size_t width, std::size_t groups)
    : acc_(rows, width), dirty_(rows, false), staged_(groups) {}

template <typename T>
void RowAccumulator<T>::stage(int group, std::vector<std::uint64_t> rows, std::vector<T> products) {
  if (group < 0 || static_cast<std::size_t>(group) >= staged_.size()) {
    throw BoundsError("unknown group " + std::to_string(group));
  }
  auto& s = staged_[static_cast<std::size_t>(group)];
  if (s.ready || static_cast<std::size_t>(group) < next_) {
    throw IntegrityError("group " + std::to_string(group) + " staged twice");
  }
  if (products.size() != rows.size() * acc_.cols()) throw ShapeError("staged products have the wrong size");
  s.ready = true;
  s.rows = std::move(rows);
  s.products = std::move(products);
  flush_ready();
}

template <typename T>
void RowAccumulator<T>::flush_ready() {
  const std::size_t w = acc_.cols();
  while (next_ < staged_.size() && staged_[next_].ready) {
    auto& s = staged_[next_];
    for (std::size_t k = 0; k < s.rows.size(); ++k) {
      auto o = acc_.row(s.rows[k]);
      const T* pr = s.products.data() + k * w;
      for (std::size_t i = 0; i < w; ++i) o[i] += pr[i];
      dirty_[s.rows[k]] = true;
    }
    s = Staged{true, {}, {}};
    ++next_;
  }
}

template <typename T>
DenseMatrix<T> RowAccumulator<T>::finish() {
  if (next_ != staged_.size()) {
    throw IntegrityError("group " + std::to_string(next_) + " was never staged");
  }
  return std::move(acc_);
}

template class RowAccumulator<float>;
template class RowAccumulator<double>;

}  // namespace allnode
