#pragma once

#include "dgbd/error.hpp"
#include "dgbd/rng.hpp"
#include "dgbd/ranksize.hpp"
#include "dgbd/gof.hpp"
#include "dgbd/taxonomy.hpp"
#include "dgbd/splitmerge.hpp"
#include "dgbd/cutoff.hpp"
#include "dgbd/io.hpp"
#include "dgbd/pipeline.hpp"
#include "dgbd/report.hpp"

namespace dgbd {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dgbd
