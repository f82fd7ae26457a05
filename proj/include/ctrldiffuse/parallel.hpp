#pragma once

#include <functional>

namespace ctrldiffuse {

/// Worker cap: min(hardware threads, CTRL_DIFFUSE_THREADS if set).
int worker_count();

/// Runs f(0..n-1) across workers with a static block partition. Results must
/// be written to index-keyed storage so the outcome does not depend on the
/// worker count.
void parallel_for(int n, const std::function<void(int)>& f);

}  // namespace ctrldiffuse
