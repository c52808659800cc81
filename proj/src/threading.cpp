#include "fusionlm/threading.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace fusionlm {
namespace {

std::size_t g_thread_cap = 0;  // 0 = hardware concurrency

std::size_t effective_threads() {
  const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  return g_thread_cap == 0 ? hw : g_thread_cap;
}

// Fork-join pool. Chunk indices are handed out by an atomic counter and a
// run() call does not return until every worker has acknowledged the
// current epoch, so no worker can ever touch a later epoch's state.
class Pool {
 public:
  ~Pool() { shutdown(); }

  void resize(std::size_t workers) {
    if (workers == workers_.size()) return;
    shutdown();
    stop_ = false;
    done_.assign(workers, epoch_);
    workers_.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) {
      workers_.emplace_back([this, i] { worker_loop(i); });
    }
  }

  void run(const std::function<void(std::size_t, std::size_t)>& fn,
           std::vector<std::pair<std::size_t, std::size_t>> chunks) {
    std::unique_lock<std::mutex> lk(m_);
    job_ = &fn;
    chunks_ = std::move(chunks);
    next_.store(0, std::memory_order_relaxed);
    ++epoch_;
    lk.unlock();
    cv_work_.notify_all();
    drain();
    lk.lock();
    cv_done_.wait(lk, [this] {
      return std::all_of(done_.begin(), done_.end(),
                         [this](std::uint64_t d) { return d >= epoch_; });
    });
    chunks_.clear();
    job_ = nullptr;
  }

 private:
  void shutdown() {
    {
      std::lock_guard<std::mutex> lk(m_);
      stop_ = true;
    }
    cv_work_.notify_all();
    for (auto& t : workers_) t.join();
    workers_.clear();
  }

  void worker_loop(std::size_t index) {
    std::uint64_t seen = 0;
    for (;;) {
      {
        std::unique_lock<std::mutex> lk(m_);
        cv_work_.wait(lk, [&] { return stop_ || epoch_ > seen; });
        if (stop_) return;
        seen = epoch_;
      }
      drain();
      {
        std::lock_guard<std::mutex> lk(m_);
        done_[index] = seen;
      }
      cv_done_.notify_all();
    }
  }

  void drain() {
    for (;;) {
      const std::size_t i = next_.fetch_add(1);
      if (i >= chunks_.size()) break;
      (*job_)(chunks_[i].first, chunks_[i].second);
    }
  }

  std::vector<std::thread> workers_;
  std::mutex m_;
  std::condition_variable cv_work_, cv_done_;
  const std::function<void(std::size_t, std::size_t)>* job_ = nullptr;
  std::vector<std::pair<std::size_t, std::size_t>> chunks_;
  std::atomic<std::size_t> next_{0};
  std::uint64_t epoch_ = 0;
  std::vector<std::uint64_t> done_;
  bool stop_ = false;
};

Pool& pool() {
  static Pool p;
  return p;
}

}  // namespace

void set_thread_count(std::size_t n) { g_thread_cap = n; }

std::size_t thread_count() { return effective_threads(); }

void parallel_for(std::size_t n, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t g = std::max<std::size_t>(1, grain);
  const std::size_t threads = effective_threads();
  if (threads == 1 || n <= g) {
    fn(0, n);
    return;
  }
  std::vector<std::pair<std::size_t, std::size_t>> chunks;
  chunks.reserve((n + g - 1) / g);
  for (std::size_t lo = 0; lo < n; lo += g) {
    chunks.emplace_back(lo, std::min(n, lo + g));
  }
  if (chunks.size() == 1) {
    fn(0, n);
    return;
  }
  pool().resize(threads - 1);
  pool().run(fn, std::move(chunks));
}

}  // namespace fusionlm
