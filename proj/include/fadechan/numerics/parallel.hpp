// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace fadechan {

// Worker cap: FADECHAN_THREADS if set to a positive integer, otherwise the
// hardware concurrency (at least 1).
std::size_t worker_count();

// Runs task(i) for i in [0, n_tasks) on up to worker_count() threads.
// Callers write results into per-task slots, so any reduction done
// afterwards in index order is independent of scheduling. The exception of
// the lowest failing task index is rethrown.
void parallel_for(std::size_t n_tasks, const std::function<void(std::size_t)>& task);

}  // namespace fadechan
