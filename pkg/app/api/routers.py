from app.api.maps import router as maps_router
from app.api.renewal import router as renewal_router
from app.api.tauberian import router as tauberian_router

all_routers = [
    maps_router,
    renewal_router,
    tauberian_router,
]

all_commands = [command for router in all_routers for command in router.commands]
