#pragma once

#include "speclog/error.hpp"
#include "speclog/types.hpp"
#include "speclog/encoding.hpp"
#include "speclog/blockmem.hpp"
#include "speclog/spec_file.hpp"
#include "speclog/engine.hpp"
#include "speclog/oracle.hpp"
#include "speclog/monitor.hpp"
#include "speclog/cfg.hpp"
#include "speclog/selection.hpp"
#include "speclog/metrics.hpp"
#include "speclog/protocol/hmac.hpp"
#include "speclog/protocol/messages.hpp"
#include "speclog/protocol/session.hpp"
#include "speclog/protocol/channel.hpp"
#include "speclog/ingest/trace_io.hpp"
#include "speclog/ingest/generator.hpp"
