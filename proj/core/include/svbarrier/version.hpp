#pragma once

#define SVBARRIER_VERSION_MAJOR 1
#define SVBARRIER_VERSION_MINOR 0
#define SVBARRIER_VERSION_PATCH 0
#define SVBARRIER_VERSION "1.0.0"
