#pragma once

#include "streamflow/kernels.hpp"

namespace streamflow::kernels::detail {

#if defined(STREAMFLOW_WITH_AVX2)
const KernelTable& avx2_table();
#endif

}  // namespace streamflow::kernels::detail
