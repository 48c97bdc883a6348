#pragma once

#include <condition_variable>
#include <mutex>

namespace claimpkg {

// Counting semaphore bounding concurrent in-flight remote calls. One
// instance is shared by the chat and embedding clients by default.
class ConcurrencyLimiter {
 public:
  explicit ConcurrencyLimiter(int limit = 8) : available_(limit) {}

  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [this] { return available_ > 0; });
    --available_;
  }

  void release() {
    {
      std::lock_guard lock(mu_);
      ++available_;
    }
    cv_.notify_one();
  }

  class Guard {
   public:
    explicit Guard(ConcurrencyLimiter& limiter) : limiter_(limiter) {
      limiter_.acquire();
    }
    ~Guard() { limiter_.release(); }
    Guard(const Guard&) = delete;
    Guard& operator=(const Guard&) = delete;

   private:
    ConcurrencyLimiter& limiter_;
  };

  static ConcurrencyLimiter& shared() {
    static ConcurrencyLimiter instance;
    return instance;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int available_;
};

}  // namespace claimpkg
