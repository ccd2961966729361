#pragma once

#include <fftw3.h>

#include <mutex>
#include <new>

namespace fgs::detail {

/// FFTW's planner is not reentrant; executing a finished plan on fresh arrays
/// is.  All plan creation and destruction is serialized on this mutex.
std::mutex& planner_mutex();

struct FftwBuffer {
  fftw_complex* p = nullptr;
  explicit FftwBuffer(std::size_t count)
      : p(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * count))) {
    if (!p) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(p); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};

} // namespace fgs::detail
