#pragma once

#define LTEST_VERSION "0.1.0"
