#pragma once

#include <condition_variable>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace edgeadmm::detail {

/// Fixed set of workers executing indexed jobs in bulk-synchronous rounds.
/// Index w processes items w, w+W, w+2W, ... so the work assignment (and
/// with it every agent's arithmetic) is independent of scheduling.
class BulkPool {
  public:
    explicit BulkPool(int workers) {
        if (workers < 1) workers = 1;
        worker_count_ = workers;
        if (workers == 1) return;
        threads_.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            threads_.emplace_back([this, w] { worker_loop(w); });
        }
    }

    ~BulkPool() {
        if (threads_.empty()) return;
        {
            std::unique_lock lock(mutex_);
            stop_ = true;
            ++generation_;
        }
        cv_start_.notify_all();
        for (auto& t : threads_) t.join();
    }

    BulkPool(const BulkPool&) = delete;
    BulkPool& operator=(const BulkPool&) = delete;

    void parallel_for(int count, const std::function<void(int)>& fn) {
        if (worker_count_ == 1 || count <= 1) {
            for (int k = 0; k < count; ++k) fn(k);
            return;
        }
        {
            std::unique_lock lock(mutex_);
            job_ = &fn;
            job_count_ = count;
            remaining_ = worker_count_;
            first_error_ = nullptr;
            ++generation_;
        }
        cv_start_.notify_all();
        {
            std::unique_lock lock(mutex_);
            cv_done_.wait(lock, [this] { return remaining_ == 0; });
            job_ = nullptr;
            if (first_error_) std::rethrow_exception(first_error_);
        }
    }

  private:
    void worker_loop(int w) {
        long seen = 0;
        while (true) {
            const std::function<void(int)>* job = nullptr;
            int count = 0;
            {
                std::unique_lock lock(mutex_);
                cv_start_.wait(lock, [this, &seen] { return generation_ != seen; });
                seen = generation_;
                if (stop_) return;
                job = job_;
                count = job_count_;
            }
            std::exception_ptr err;
            if (job) {
                try {
                    for (int k = w; k < count; k += worker_count_) (*job)(k);
                } catch (...) {
                    err = std::current_exception();
                }
            }
            {
                std::unique_lock lock(mutex_);
                if (err && !first_error_) first_error_ = err;
                if (--remaining_ == 0) cv_done_.notify_all();
            }
        }
    }

    int worker_count_ = 1;
    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable cv_start_;
    std::condition_variable cv_done_;
    const std::function<void(int)>* job_ = nullptr;
    int job_count_ = 0;
    int remaining_ = 0;
    long generation_ = 0;
    bool stop_ = false;
    std::exception_ptr first_error_;
};

}  // namespace edgeadmm::detail
