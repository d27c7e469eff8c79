#pragma once

namespace bolw {

// Execution policy for the data-parallel kernels (matrix assembly, the
// variational E-step, per-camera binning). `serial` is the reference
// implementation; `parallel` uses OpenMP. Both must produce bit-identical
// output: parallel regions only ever compute independent slots, and any
// floating-point reduction is performed serially in a fixed order.
enum class Exec {
    serial,
    parallel,
};

} // namespace bolw
