#include <atomic>
#include <cstdlib>
#include <new>

#include <gtest/gtest.h>

#include "tdlab/learners.hpp"

namespace {
std::atomic<std::size_t> g_allocations{0};
}

void* operator new(std::size_t n) {
  ++g_allocations;
  if (void* p = std::malloc(n == 0 ? 1 : n)) return p;
  throw std::bad_alloc();
}
void* operator new[](std::size_t n) { return operator new(n); }
void operator delete(void* p) noexcept { std::free(p); }
void operator delete[](void* p) noexcept { std::free(p); }
void operator delete(void* p, std::size_t) noexcept { std::free(p); }
void operator delete[](void* p, std::size_t) noexcept { std::free(p); }

namespace {

using namespace tdlab;

TEST(Allocations, UpdatesNeverAllocate) {
  const std::size_t d = 30;
  std::vector<double> x(d, 0.0), xn(d, 0.0);
  x[3] = 1.0;
  xn[7] = 1.0;
  TransitionSample t{3, 1, 7, 0.4, 0.9, 1.125, 1.0};
  const HyperParams hp{0.01, 0.5, 0.9, 0.5};
  for (const auto& alg : algorithms()) {
    auto st = make_learner_state(d);
    alg.update(st, t, x, xn, hp);
    const std::size_t before = g_allocations.load();
    for (int i = 0; i < 1000; ++i) {
      alg.update(st, t, x, xn, hp);
      std::swap(x, xn);
    }
    EXPECT_EQ(g_allocations.load() - before, 0u) << alg.name;
  }
}

}  // namespace
