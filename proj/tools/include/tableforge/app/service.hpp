#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "tableforge/app/corpus.hpp"
#include "tableforge/verifier.hpp"

namespace httplib {
class Server;
}

namespace tableforge::app {

// HTTP review service over a corpus directory. Reads run concurrently;
// decisions are applied one at a time and persisted before responding.
class ReviewService {
 public:
  ReviewService(Corpus corpus, std::vector<Flag> flags, std::string ui_dir = "");
  ~ReviewService();

  // Returns false when the address cannot be bound. Port 0 picks a free port.
  bool bind(const std::string& host, int port);
  int port() const { return port_; }

  // Blocks until stop().
  void run();
  // Blocks until a concurrent run() accepts connections; stop() before that is lost.
  void wait_until_ready();
  void stop();

 private:
  void routes();

  std::unique_ptr<httplib::Server> server_;
  std::mutex mutex_;
  Corpus corpus_;
  ReviewCorpus review_;
  std::string ui_dir_;
  int port_ = 0;
};

}  // namespace tableforge::app
