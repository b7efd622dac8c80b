#include "idp/kernels.hpp"

namespace idp::kernels {

const KernelTable* detail::avx2_table() { return nullptr; }

}  // namespace idp::kernels
