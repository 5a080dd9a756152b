#pragma once

#include <cstddef>
#include <functional>

namespace qmimo {

/// Worker count from QUANTAMIMO_WORKERS, else the hardware concurrency.
int default_workers();

/// Runs body(i) for i in [0, count) on up to `workers` threads.  Work items are
/// claimed dynamically; callers must write results into per-index slots so the
/// outcome does not depend on the schedule.  The first exception thrown by any
/// item is rethrown after all threads join.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body);

}  // namespace qmimo
