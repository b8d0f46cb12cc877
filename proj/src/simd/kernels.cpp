#include "ekms/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace ekms::simd {

namespace {

const Kernels* table_for(Level level) {
#if EKMS_HAVE_AVX2
  if (level == Level::Avx2) return &avx2_kernels();
#endif
  (void)level;
  return &scalar_kernels();
}

Level initial_level() {
  Level best = cpu_has_avx2() ? Level::Avx2 : Level::Scalar;
  if (const char* env = std::getenv("EKMS_SIMD")) {
    std::string v(env);
    if (v == "scalar") return Level::Scalar;
    if (v == "avx2" && best == Level::Avx2) return Level::Avx2;
  }
  return best;
}

std::atomic<Level>& level_slot() {
  static std::atomic<Level> slot{initial_level()};
  return slot;
}

}  // namespace

bool cpu_has_avx2() {
#if EKMS_HAVE_AVX2 && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

const Kernels& active() { return *table_for(level_slot().load(std::memory_order_relaxed)); }

Level active_level() { return level_slot().load(std::memory_order_relaxed); }

bool set_level(Level level) {
  if (level == Level::Avx2 && !cpu_has_avx2()) return false;
  level_slot().store(level, std::memory_order_relaxed);
  return true;
}

std::string_view to_string(Level level) { return level == Level::Avx2 ? "avx2" : "scalar"; }

}  // namespace ekms::simd
