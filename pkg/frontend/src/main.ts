import { ApiClient } from "./api";
import { initApp } from "./app";

initApp(document, new ApiClient(""));
