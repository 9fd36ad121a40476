#pragma once

#include <coroutine>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <utility>

#include "pdts/common.hpp"
#include "pdts/memory.hpp"
#include "pdts/trace.hpp"

namespace pdts {

struct Message {
  std::uint64_t msg_id = 0;
  std::optional<TxnId> txn;
  ProcessRef src;
  ProcessRef dst;
  json payload;
  std::size_t sent_at_step = 0;
  std::uint64_t sent_tick = 0;
};

enum class ActionKind { Prim, LockAcquire, Send, Receive, Note, Respond };

/// The next step a suspended handler wants to take. The engine performs it,
/// stores the result and resumes the handler.
struct Action {
  ActionKind kind = ActionKind::Note;

  std::string obj;  // Prim, LockAcquire
  PrimOp op = PrimOp::Read;
  Word arg;       // value for Write, expected for Cas
  Word arg2;      // desired for Cas

  ProcessRef dst;  // Send
  json payload;

  std::optional<std::uint64_t> timeout_ticks;  // Receive

  std::string tag;  // Note
  json data;

  std::optional<Outcome> outcome;  // Respond (coordinator only)
  json read_set;
  json write_set;
};

struct ActionResult {
  Word value;
  std::optional<Message> message;
  bool timed_out = false;
};

/// A resumable handler. Each `co_await` on one of the step awaitables below
/// suspends before the step; the engine executes exactly that step on resume.
class Handler {
 public:
  struct promise_type {
    Action pending;
    ActionResult result;
    bool responded = false;
    std::exception_ptr error;

    Handler get_return_object() {
      return Handler(std::coroutine_handle<promise_type>::from_promise(*this));
    }
    std::suspend_always initial_suspend() noexcept { return {}; }
    std::suspend_always final_suspend() noexcept { return {}; }
    void return_void() noexcept {}
    void unhandled_exception() noexcept { error = std::current_exception(); }
  };

  Handler() = default;
  explicit Handler(std::coroutine_handle<promise_type> h) : h_(h) {}
  Handler(Handler&& o) noexcept : h_(std::exchange(o.h_, {})) {}
  Handler& operator=(Handler&& o) noexcept {
    if (this != &o) {
      reset();
      h_ = std::exchange(o.h_, {});
    }
    return *this;
  }
  Handler(const Handler&) = delete;
  Handler& operator=(const Handler&) = delete;
  ~Handler() { reset(); }

  explicit operator bool() const { return static_cast<bool>(h_); }
  bool done() const { return !h_ || h_.done(); }
  const Action& pending() const { return h_.promise().pending; }

  /// Runs local computation up to the next step (or completion).
  void resume(ActionResult result) {
    h_.promise().result = std::move(result);
    h_.resume();
    if (h_.promise().error) std::rethrow_exception(h_.promise().error);
  }

 private:
  void reset() {
    if (h_) h_.destroy();
    h_ = {};
  }
  std::coroutine_handle<promise_type> h_;
};

namespace detail {

struct StepAwaiter {
  Action action;
  std::coroutine_handle<Handler::promise_type> self;

  bool await_ready() const noexcept { return false; }
  void await_suspend(std::coroutine_handle<Handler::promise_type> h) {
    self = h;
    h.promise().pending = std::move(action);
  }
  ActionResult await_resume() { return std::move(self.promise().result); }
};

}  // namespace detail

// Step awaitables. Each returns an ActionResult on resumption.
inline detail::StepAwaiter prim_read(std::string obj) {
  Action a;
  a.kind = ActionKind::Prim;
  a.obj = std::move(obj);
  a.op = PrimOp::Read;
  return {std::move(a), {}};
}

inline detail::StepAwaiter prim_write(std::string obj, Word v) {
  Action a;
  a.kind = ActionKind::Prim;
  a.obj = std::move(obj);
  a.op = PrimOp::Write;
  a.arg = std::move(v);
  return {std::move(a), {}};
}

inline detail::StepAwaiter prim_cas(std::string obj, Word expected, Word desired) {
  Action a;
  a.kind = ActionKind::Prim;
  a.obj = std::move(obj);
  a.op = PrimOp::Cas;
  a.arg = std::move(expected);
  a.arg2 = std::move(desired);
  return {std::move(a), {}};
}

/// CAS(None → owner) on a short-lived lock; enabled only while the lock is free.
inline detail::StepAwaiter lock_acquire(std::string obj, Word owner) {
  Action a;
  a.kind = ActionKind::LockAcquire;
  a.obj = std::move(obj);
  a.op = PrimOp::Cas;
  a.arg = nullptr;
  a.arg2 = std::move(owner);
  return {std::move(a), {}};
}

inline detail::StepAwaiter send_to(ProcessRef dst, json payload) {
  Action a;
  a.kind = ActionKind::Send;
  a.dst = dst;
  a.payload = std::move(payload);
  return {std::move(a), {}};
}

inline detail::StepAwaiter receive(std::optional<std::uint64_t> timeout_ticks = std::nullopt) {
  Action a;
  a.kind = ActionKind::Receive;
  a.timeout_ticks = timeout_ticks;
  return {std::move(a), {}};
}

inline detail::StepAwaiter note(std::string tag, json data = json::object()) {
  Action a;
  a.kind = ActionKind::Note;
  a.tag = std::move(tag);
  a.data = std::move(data);
  return {std::move(a), {}};
}

inline detail::StepAwaiter respond() {
  Action a;
  a.kind = ActionKind::Respond;
  return {std::move(a), {}};
}

inline detail::StepAwaiter respond(Outcome outcome, json read_set, json write_set) {
  Action a;
  a.kind = ActionKind::Respond;
  a.outcome = outcome;
  a.read_set = std::move(read_set);
  a.write_set = std::move(write_set);
  return {std::move(a), {}};
}

}  // namespace pdts
