#pragma once

#include <csignal>
#include <pthread.h>

namespace wellness::tools {

/// Blocks SIGINT and SIGTERM in every thread started afterwards.
inline sigset_t block_termination_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return set;
}

inline void wait_for_signal(const sigset_t& set) {
  int sig = 0;
  sigwait(&set, &sig);
}

}  // namespace wellness::tools
