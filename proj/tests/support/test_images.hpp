#pragma once

#include "core/image.hpp"

#include <string>
#include <vector>

// Deterministic synthetic test images. The twelve names form the benchmark
// suite used where a fixed image set is required; every generator is a pure
// function of (name, side).
namespace testimg {

const std::vector<std::string>& suite_names();

gsrc::Image by_name(const std::string& name, int side = 256);

// Writes <name>.pgm for every suite image into dir (created if missing).
void write_suite(const std::string& dir, int side = 256);

} // namespace testimg
