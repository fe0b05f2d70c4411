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

#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "allnode/kernels.hpp"
#include "allnode/partition.hpp"
#include "allnode/transport.hpp"

namespace allnode {

enum class GroupKind { Local, Remote };

/// Non-zeros of one machine's block whose columns fall in one contiguous
/// column range owned by a single row-group.
struct NzGroup {
  int id = 0;
  int machine = 0;
  GroupKind kind = GroupKind::Local;
  int row_group = 0;
  /// [first column, last column + 1).
  ColumnRange cols;
  /// Indices into the block's non-zero array, ascending.
  std::vector<std::uint64_t> nonzeros;
  /// Distinct columns, ascending.
  std::vector<NodeId> columns;
};

inline constexpr std::uint64_t kDefaultGroupEntries = 65536;

/// Splits the non-zeros of local rows `rows` of the block held by `machine`.
/// Local columns form one group; columns of each remote row-group are cut in
/// ascending order into runs of at most target_entries non-zeros. A column is
/// never split, so a column with more non-zeros than the target forms its own
/// group. Group ids follow ascending column order; empty groups are dropped.
std::vector<NzGroup> partition_nonzeros(const CsrGraph& block, const GridConfig& grid, int machine,
                                        std::uint64_t target_entries, IndexRange rows);
std::vector<NzGroup> partition_nonzeros(const CsrGraph& block, const GridConfig& grid, int machine,
                                        std::uint64_t target_entries);

enum class ScheduleVariant { Naive, PrefetchIds, LocalFirst };
std::string_view schedule_name(ScheduleVariant v);
ScheduleVariant parse_schedule(std::string_view name);

enum class TaskKind { IdComm, FeatComm, Compute };

struct GroupTask {
  TaskKind kind = TaskKind::Compute;
  int group = 0;
  friend bool operator==(const GroupTask&, const GroupTask&) = default;
};

/// Number of groups whose ids are requested ahead of the group being computed.
inline constexpr int kPrefetchDepth = 2;

struct GroupSchedule {
  ScheduleVariant variant = ScheduleVariant::Naive;
  std::vector<GroupTask> tasks;

  /// Throws IntegrityError unless every group has exactly one task per phase,
  /// phases of a group run in order, and features are received in the order
  /// their ids were sent.
  void validate(std::span<const NzGroup> groups) const;
};

/// naive: id, feat, compute per group in id order. prefetch: ids of the next
/// kPrefetchDepth groups are sent before a group is computed. local_first:
/// prefetch with the local group moved to the front.
GroupSchedule build_schedule(std::span<const NzGroup> groups, ScheduleVariant variant);

/// Per-row cache for grouped SPMM. Groups stage per-non-zero products in any
/// order; rows are accumulated group by group in ascending group id, which
/// for column-ordered groups is the CSR order of the ungrouped kernel.
template <typename T>
class RowAccumulator {
 public:
  RowAccumulator(std::size_t rows, std::size_t width, std::size_t groups);

  /// products holds one width-wide vector per entry of `rows`.
  void stage(int group, std::vector<std::uint64_t> rows, std::vector<T> products);
  bool dirty(std::size_t row) const { return dirty_[row]; }
  std::size_t flushed_groups() const noexcept { return next_; }
  /// Throws IntegrityError if a group was never staged.
  DenseMatrix<T> finish();

 private:
  struct Staged {
    bool ready = false;
    std::vector<std::uint64_t> rows;
    std::vector<T> products;
  };
  void flush_ready();

  DenseMatrix<T> acc_;
  std::vector<bool> dirty_;
  std::vector<Staged> staged_;
  std::size_t next_ = 0;
};

struct GroupingOptions {
  std::uint64_t target_entries = kDefaultGroupEntries;
  ScheduleVariant variant = ScheduleVariant::LocalFirst;
};

/// dist_spmm with partitioned communication. Output is bit-identical to
/// dist_spmm for every grouping and schedule.
template <typename T>
TensorTile<T> grouped_spmm(Worker& worker, const CsrGraph& block, const EdgeValues<T>& edges,
                           const TensorTile<T>& h, const GroupingOptions& options);

/// dist_sddmm_split with partitioned source-feature communication.
template <typename T>
AttnBlock<T> grouped_sddmm_split(Worker& worker, const CsrGraph& block, const TensorTile<T>& dest,
                                 const TensorTile<T>& src, std::size_t heads,
                                 const GroupingOptions& options);

}  // namespace allnode
